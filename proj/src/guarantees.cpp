#include "hypoguard/guarantees.hpp"

#include <cmath>
#include <limits>

#include "hypoguard/error.hpp"

namespace hypoguard {

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be finite and > 0");
  }
}

void require_prefactor(double N, const char* what) {
  if (!(N >= 1.0) || !std::isfinite(N)) {
    throw DomainError(std::string(what) + " must be finite and >= 1");
  }
}

void require_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1)");
  }
}

}  // namespace

double concentration_bound(const BernsteinPair& pair, double c, double dmu_norm, double r,
                           double T) {
  if (!(c > 0.0 && c <= 1.0)) {
    throw DomainError("c must lie in (0, 1]");
  }
  require_prefactor(dmu_norm, "dmu_norm");
  require_positive(T, "T");
  return dmu_norm / c * std::exp(-T * psi_star(pair, r));
}

ConfidenceReport confidence_radius(const BernsteinPair& pair_plus, const BernsteinPair& pair_minus,
                                   double N, double delta, double T) {
  require_prefactor(N, "N");
  require_delta(delta);
  require_positive(T, "T");
  ConfidenceReport out;
  out.T = T;
  out.delta = delta;
  out.N = N;
  out.eta = std::log(2.0 * N / delta) / T;
  out.pair_plus = pair_plus;
  out.pair_minus = pair_minus;
  out.r_plus = psi_star_inv(pair_plus, out.eta);
  out.r_minus = psi_star_inv(pair_minus, out.eta);
  return out;
}

double min_time_for_radius(const BernsteinPair& pair, double N, double delta, double r) {
  require_prefactor(N, "N");
  require_delta(delta);
  if (!(r > 0.0)) {
    throw DomainError("min_time_for_radius: r must be > 0 (r = 0 needs infinite time)");
  }
  return std::log(2.0 * N / delta) / psi_star(pair, r);
}

double eta_T(double c, double dmu_norm, double rel_entropy, double T) {
  if (!(c > 0.0 && c <= 1.0)) {
    throw DomainError("c must lie in (0, 1]");
  }
  require_prefactor(dmu_norm, "dmu_norm");
  if (!(rel_entropy >= 0.0) || !std::isfinite(rel_entropy)) {
    throw DomainError("relative entropy must be finite and >= 0");
  }
  require_positive(T, "T");
  return (-std::log(c) + std::log(dmu_norm) + rel_entropy) / T;
}

BiasBounds uq_bias_bound(const BernsteinPair& pair_plus, const BernsteinPair& pair_minus,
                         double eta, double transient) {
  if (!(transient >= 0.0)) {
    throw DomainError("transient must be >= 0");
  }
  return BiasBounds{psi_star_inv(pair_minus, eta) + transient,
                    psi_star_inv(pair_plus, eta) + transient};
}

double transient_term(const DerivedConstants& derived, double dmu_norm, double variance, double T) {
  require_positive(derived.alpha, "alpha");
  require_positive(derived.c, "c");
  require_prefactor(dmu_norm, "dmu_norm");
  if (!(variance >= 0.0)) {
    throw DomainError("variance must be >= 0");
  }
  require_positive(T, "T");
  const double x = T / derived.alpha;
  // (1 - e^{-x}) / x without cancellation for small x.
  const double decay = -std::expm1(-x) / x;
  return derived.C / derived.c * decay * dmu_norm * std::sqrt(variance);
}

UQReport uq_report(const BernsteinPair& pair_plus, const BernsteinPair& pair_minus,
                   const DerivedConstants& derived, double dmu_norm, double variance,
                   double rel_entropy, double T) {
  UQReport out;
  out.rel_entropy = rel_entropy;
  out.eta_T = eta_T(derived.c, dmu_norm, rel_entropy, T);
  out.transient = transient_term(derived, dmu_norm, variance, T);
  const BiasBounds bounds = uq_bias_bound(pair_plus, pair_minus, out.eta_T, out.transient);
  out.bound_minus = bounds.minus;
  out.bound_plus = bounds.plus;
  return out;
}

}  // namespace hypoguard
