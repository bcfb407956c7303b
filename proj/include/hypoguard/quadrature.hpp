#pragma once

#include <functional>
#include <vector>

namespace hypoguard {

using ScalarFn = std::function<double(double)>;

/// Composite Gauss-Legendre rule with `panels` equal panels. Supported orders: 5, 10.
double gauss_legendre(const ScalarFn& f, double a, double b, int panels = 1, int order = 5);

/// Adaptive Gauss-Kronrod on [a, b], split at any interior breakpoints
/// (kinks of the integrand).
double integrate(const ScalarFn& f, double a, double b, std::vector<double> breakpoints = {});

/// Sign changes of g on a uniform grid of [a, b], refined by bisection.
std::vector<double> sign_changes(const ScalarFn& g, double a, double b, int grid = 2000);

/// Normalized 1-D density on [lo, hi], with everything outside negligible.
struct Density1D {
  ScalarFn pdf;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;  ///< kinks of observables to integrate against

  double expect(const ScalarFn& f, std::vector<double> extra_breakpoints = {}) const;
};

Density1D gaussian_density_1d(double mean, double sd);

/// Density proportional to exp(-beta V) on [lo, hi], normalized numerically.
Density1D gibbs_density_1d(const ScalarFn& potential, double beta, double lo, double hi);

}  // namespace hypoguard
