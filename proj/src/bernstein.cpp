#include "hypoguard/bernstein.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hypoguard/error.hpp"

namespace hypoguard {

void BernsteinPair::validate() const {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DomainError("BernsteinPair: v must be finite and >= 0, got " + std::to_string(v));
  }
  if (!(b >= 0.0) || !std::isfinite(b)) {
    throw DomainError("BernsteinPair: b must be finite and >= 0, got " + std::to_string(b));
  }
}

double psi(const BernsteinPair& pair, double lambda) {
  pair.validate();
  if (!(lambda >= 0.0)) {
    throw DomainError("psi: lambda must be >= 0");
  }
  const double denom = 1.0 - lambda * pair.b;
  if (denom <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double value = lambda * lambda * pair.v / (2.0 * denom);
  return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

double psi_star(const BernsteinPair& pair, double r) {
  pair.validate();
  if (!(r >= 0.0)) {
    throw DomainError("psi_star: r must be >= 0");
  }
  if (pair.degenerate()) {
    throw DegeneratePairError("psi_star: v = b = 0 gives no finite transform");
  }
  if (r == 0.0) {
    return 0.0;
  }
  // v (1 + sqrt(1 + 2br/v))^2 == (sqrt(v) + sqrt(v + 2br))^2, which stays
  // finite as v -> 0 and reproduces the limit r / b there.
  const double root = std::sqrt(pair.v) + std::sqrt(pair.v + 2.0 * pair.b * r);
  return 2.0 * r * r / (root * root);
}

double psi_star_inv(const BernsteinPair& pair, double eta) {
  pair.validate();
  if (!(eta >= 0.0)) {
    throw DomainError("psi_star_inv: eta must be >= 0");
  }
  return std::sqrt(2.0 * pair.v * eta) + pair.b * eta;
}

}  // namespace hypoguard
