#pragma once

#include "hypoguard/bernstein.hpp"

namespace hypoguard {

/// Upper cap on eps used by the optimizer; c = sqrt(1 - eps) degenerates at 1.
inline constexpr double kDefaultEpsCap = 0.999;

/// Hypocoercivity constants of a sampler/target pair.
///
/// lambda_p: Poincare constant of the velocity dissipation (averaged over positions).
/// lambda_q: position-direction constant, in (0, 1].
/// R0: bound on the off-diagonal coupling terms.
/// eps: weight of the modified inner product, in (0, 1).
struct HypoParams {
  double lambda_p = 0.0;
  double lambda_q = 0.0;
  double R0 = 0.0;
  double eps = 0.0;

  /// Range checks on each field; eps = 0 is tolerated (Lambda(0) = 0).
  void validate() const;
};

/// Constants derived from an admissible HypoParams.
struct DerivedConstants {
  double Lambda = 0.0;  ///< smallest eigenvalue of the 2x2 coercivity matrix
  double c = 0.0;       ///< sqrt(1 - eps), lower norm-equivalence constant
  double C = 0.0;       ///< sqrt(1 + eps), upper norm-equivalence constant
  double alpha = 0.0;   ///< (1 + eps) / Lambda, Poincare constant in the modified product
};

/// Stationary statistics of a bounded observable f.
struct ObservableStats {
  double mean = 0.0;
  double variance = 0.0;
  double sup_norm = 0.0;  ///< sup |f - mean|

  void validate() const;
};

/// Output of bernstein_from_hypo. The same pair serves both signs of the deviation.
struct HypoBernstein {
  BernsteinPair pair;
  double N = 1.0;  ///< dmu_norm / sqrt(1 - eps)
  DerivedConstants derived;
};

/// Lambda(eps): smallest eigenvalue of [[eps lq, -eps R0/2], [-eps R0/2, lp - eps]].
/// May be <= 0; callers decide admissibility.
double lambda_of_eps(const HypoParams& params);

/// Supremum of eps in (0, 1) with Lambda(eps) > 0, found by bisection; 1 when
/// Lambda stays positive on all of (0, 1).
double eps_max(double lambda_q, double lambda_p, double R0);

/// Closed-form positivity threshold 4 lq lp / (4 lq + R0^2), before capping at 1.
double eps_threshold_closed_form(double lambda_q, double lambda_p, double R0);

/// The eps in (0, min(eps_max, cap)) maximizing Lambda(eps). Lambda is concave in
/// eps, so golden-section search converges to the global maximum.
double optimal_eps(double lambda_q, double lambda_p, double R0, double cap = kDefaultEpsCap);

/// lambda_q = 1 - 1 / (1 + kappa_p C_nu). C_nu = +infinity gives 1.
double lambda_q_from_target(double C_nu, double kappa_p);

DerivedConstants derived_constants(const HypoParams& params);

/// Explicit Bernstein constants (v, b, N) for an observable with the given statistics.
/// Throws AdmissibilityError when Lambda(eps) <= 0.
HypoBernstein bernstein_from_hypo(const HypoParams& params, const ObservableStats& stats,
                                  double dmu_norm);

}  // namespace hypoguard
