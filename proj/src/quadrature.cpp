#include "hypoguard/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "hypoguard/error.hpp"

namespace hypoguard {

double gauss_legendre(const ScalarFn& f, double a, double b, int panels, int order) {
  if (panels < 1) {
    throw DomainError("gauss_legendre: panels must be >= 1");
  }
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * width;
    const double hi = (k + 1 == panels) ? b : lo + width;
    switch (order) {
      case 5:
        total += boost::math::quadrature::gauss<double, 5>::integrate(f, lo, hi);
        break;
      case 10:
        total += boost::math::quadrature::gauss<double, 10>::integrate(f, lo, hi);
        break;
      default:
        throw DomainError("gauss_legendre: supported orders are 5 and 10");
    }
  }
  return total;
}

double integrate(const ScalarFn& f, double a, double b, std::vector<double> breakpoints) {
  std::vector<double> cuts{a};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (const double x : breakpoints) {
    if (x > cuts.back() && x < b) {
      cuts.push_back(x);
    }
  }
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 15,
                                                                         1e-13);
  }
  return total;
}

std::vector<double> sign_changes(const ScalarFn& g, double a, double b, int grid) {
  std::vector<double> roots;
  const double step = (b - a) / grid;
  double x0 = a;
  double g0 = g(x0);
  for (int k = 1; k <= grid; ++k) {
    const double x1 = (k == grid) ? b : a + k * step;
    const double g1 = g(x1);
    if (g0 == 0.0) {
      roots.push_back(x0);
    } else if (g0 * g1 < 0.0) {
      double lo = x0;
      double hi = x1;
      double glo = g0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
          break;
        }
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0) && gm != 0.0) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    g0 = g1;
  }
  return roots;
}

double Density1D::expect(const ScalarFn& f, std::vector<double> extra_breakpoints) const {
  extra_breakpoints.insert(extra_breakpoints.end(), breakpoints.begin(), breakpoints.end());
  const ScalarFn& p = pdf;
  return integrate([&](double x) { return f(x) * p(x); }, lo, hi, std::move(extra_breakpoints));
}

Density1D gaussian_density_1d(double mean, double sd) {
  if (!(sd > 0.0)) {
    throw DomainError("gaussian_density_1d: sd must be > 0");
  }
  Density1D out;
  out.pdf = [mean, sd](double x) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
  };
  out.lo = mean - 14.0 * sd;
  out.hi = mean + 14.0 * sd;
  out.breakpoints = {mean};
  return out;
}

Density1D gibbs_density_1d(const ScalarFn& potential, double beta, double lo, double hi) {
  if (!(hi > lo)) {
    throw DomainError("gibbs_density_1d: empty interval");
  }
  // Shift by the minimum on a grid so exp() stays in range.
  double vmin = potential(lo);
  for (int k = 1; k <= 1000; ++k) {
    vmin = std::min(vmin, potential(lo + (hi - lo) * k / 1000.0));
  }
  auto weight = [potential, beta, vmin](double x) { return std::exp(-beta * (potential(x) - vmin)); };
  const double Z = integrate(weight, lo, hi);
  Density1D out;
  out.pdf = [weight, Z](double x) { return weight(x) / Z; };
  out.lo = lo;
  out.hi = hi;
  return out;
}

}  // namespace hypoguard
