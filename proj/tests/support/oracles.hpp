#pragma once

// Independent reference computations for the unit and acceptance tests.
// None of these call into the library under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

namespace oracle {

// Hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double psi(double v, double b, double lambda) { return lambda * lambda * v / (2.0 * (1.0 - lambda * b)); }

// sup over lambda in [0, 1/b) of lambda r - psi(lambda), by Brent's method on
// the negated objective. The objective is concave, so the local maximum is global.
inline double legendre_sup(double v, double b, double r) {
  if (r == 0.0) {
    return 0.0;
  }
  const double hi = b > 0.0 ? (1.0 / b) * (1.0 - 1e-15) : std::max(10.0, 10.0 * r / v);
  const auto neg = [&](double lambda) { return -(lambda * r - psi(v, b, lambda)); };
  // Bracket refinement: find the maximizer on a coarse log grid first.
  double best = 0.0;
  double best_val = 0.0;
  const int n = 400;
  for (int k = 1; k <= n; ++k) {
    const double lambda = hi * std::pow(1e-12, 1.0 - static_cast<double>(k) / n);
    const double val = -neg(lambda);
    if (val > best_val) {
      best_val = val;
      best = lambda;
    }
  }
  const double lo_b = best / 1.1;
  const double hi_b = std::min(hi, best * 1.1);
  const auto res = boost::math::tools::brent_find_minima(neg, lo_b, hi_b, std::numeric_limits<double>::digits);
  return std::max(best_val, -res.second);
}

// Smallest eigenvalue of [[a, c], [c, d]] by the quadratic formula.
inline double smallest_eig_2x2(double a, double c, double d) {
  const double mean = 0.5 * (a + d);
  const double half_gap = std::hypot(0.5 * (a - d), c);
  return mean - half_gap;
}

// Integral of f over the real line, split at the (sorted) kinks of f:
// exp_sinh on the two tails, tanh_sinh in between.
template <class F>
double integrate_split(F f, std::vector<double> kinks) {
  if (kinks.empty()) {
    boost::math::quadrature::sinh_sinh<double> integrator;
    return integrator.integrate(f);
  }
  std::sort(kinks.begin(), kinks.end());
  boost::math::quadrature::exp_sinh<double> tail;
  boost::math::quadrature::tanh_sinh<double> inner;
  const double lo = kinks.front();
  const double hi = kinks.back();
  double total = tail.integrate([&](double u) { return f(lo - u); }) + tail.integrate([&](double u) { return f(hi + u); });
  for (std::size_t i = 0; i + 1 < kinks.size(); ++i) {
    if (kinks[i + 1] > kinks[i]) {
      total += inner.integrate(f, kinks[i], kinks[i + 1]);
    }
  }
  return total;
}

// E[g(X)] for X ~ N(mean, sd^2), with g possibly kinked at `kinks`.
template <class G>
double gaussian_expectation(G g, double mean, double sd, std::vector<double> kinks = {}) {
  const double norm = 1.0 / (sd * std::sqrt(2.0 * M_PI));
  return integrate_split(
      [&](double x) {
        const double z = (x - mean) / sd;
        return g(x) * norm * std::exp(-0.5 * z * z);
      },
      std::move(kinks));
}

template <class F>
double integrate_finite(F f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b);
}

template <class F>
double integrate_real_line(F f) {
  boost::math::quadrature::sinh_sinh<double> integrator;
  return integrator.integrate(f);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= t) ++i;
    while (j < y.size() && y[j] <= t) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  return d;
}

// One-sample KS statistic against a continuous CDF.
template <class Cdf>
double ks_one_sample(std::vector<double> x, Cdf cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    d = std::max({d, std::abs((i + 1) / n - F), std::abs(F - i / n)});
  }
  return d;
}

}  // namespace oracle
