#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypoguard/hypocoercivity.hpp"
#include "hypoguard/quadrature.hpp"
#include "hypoguard/rng.hpp"

namespace hypoguard {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Target nu* proportional to exp(-beta V(q)) on R^dim.
struct TargetModel {
  std::string name;
  int dim = 1;
  double beta = 1.0;
  double poincare_const = 0.0;  ///< C_nu* with ||grad g||^2 >= C Var(g)
  std::function<double(const Vector&)> potential;
  std::function<Vector(const Vector&)> gradient;
  /// Constant Hessian H when V = q^T H q / 2. Enables exact event inversion and exact flows.
  std::optional<Matrix> hessian;
  /// Upper bound on the spectral norm of the Hessian along q + s v, s in [0, window].
  std::function<double(const Vector& q, const Vector& v, double window)> hessian_norm_bound;

  bool quadratic() const noexcept { return hessian.has_value(); }
  /// Covariance (beta H)^{-1} of the Gaussian stationary law; quadratic targets only.
  Matrix covariance() const;
  /// Exact draw from nu*; quadratic targets only.
  Vector sample_position(Engine& rng) const;
  /// One-dimensional marginal of nu* along `coordinate`.
  Density1D marginal_1d(int coordinate = 0) const;
};

struct TargetParams {
  int dim = 1;
  double h = 1.0;               ///< gaussian_iso curvature
  std::vector<double> h_diag;   ///< gaussian_aniso diagonal (used when `hessian` is empty)
  std::optional<Matrix> hessian;  ///< gaussian_aniso full Hessian
  double beta = 1.0;
  std::optional<double> poincare_const;  ///< required for double_well
};

/// name in {gaussian_iso, gaussian_aniso, double_well}.
TargetModel builtin_target(std::string_view name, const TargetParams& params);

/// Diagnostic estimate of the Poincare constant of exp(-beta V) on [lo, hi]:
/// the smallest nonzero generalized eigenvalue of a weighted finite-element
/// discretization of the Dirichlet form. An estimate, not a certificate.
double estimate_poincare_1d(const std::function<double(double)>& potential, double beta, double lo,
                            double hi, int cells = 400);

/// Invariant velocity law rho*.
struct MomentumModel {
  enum class Kind { gaussian, rademacher };

  Kind kind = Kind::gaussian;
  double mass = 1.0;
  double beta = 1.0;

  /// E[p_1^2] / m^2.
  double kappa_p() const noexcept;
  /// E[p_1^2].
  double second_moment() const noexcept;
  Vector draw(Engine& rng, int dim) const;
};

MomentumModel gaussian_momentum(double mass, double beta);
MomentumModel rademacher_momentum();

/// Bounded position observable with its stationary statistics.
struct Observable {
  std::string name;
  int coordinate = 0;
  std::function<double(double)> f;  ///< applied to q[coordinate]
  ObservableStats stats;
  bool stats_closed_form = false;
  std::vector<double> kinks;

  double operator()(const Vector& q) const { return f(q[coordinate]); }
};

struct ObservableParams {
  double omega = 1.0;
  double a = -1.0;  ///< indicator lower end
  double b = 1.0;   ///< indicator upper end
  double clip = 1.0;
  int coordinate = 0;
};

/// name in {sin, cos, indicator, clipped_coord}. Raw coordinates are rejected.
Observable builtin_observable(std::string_view name, const ObservableParams& params,
                              const TargetModel& target);

/// L^2(nu*) norm of d mu / d nu* for mu = N(mean0, sd0^2), nu* = N(0, sigma^2).
/// Requires sd0^2 < 2 sigma^2.
double gaussian_chi_square_norm(double mean0, double sd0, double sigma);

}  // namespace hypoguard
