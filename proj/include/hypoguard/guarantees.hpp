#pragma once

#include "hypoguard/bernstein.hpp"
#include "hypoguard/hypocoercivity.hpp"

namespace hypoguard {

/// Two-sided confidence interval (-r_minus, r_plus) for F_T - mu*[f].
struct ConfidenceReport {
  double T = 0.0;
  double delta = 0.0;
  double N = 1.0;
  double eta = 0.0;  ///< log(2N / delta) / T
  double r_minus = 0.0;
  double r_plus = 0.0;
  BernsteinPair pair_plus;
  BernsteinPair pair_minus;
};

struct BiasBounds {
  double minus = 0.0;
  double plus = 0.0;
};

/// Bias bound on a perturbed model, with the rate and transient that went into it.
struct UQReport {
  double eta_T = 0.0;
  double rel_entropy = 0.0;
  double transient = 0.0;
  double bound_plus = 0.0;
  double bound_minus = 0.0;
};

/// c^{-1} dmu_norm exp(-T Psi*(r)). Values above 1 are returned unchanged.
double concentration_bound(const BernsteinPair& pair, double c, double dmu_norm, double r, double T);

/// True when a probability bound carries no information.
inline bool vacuous_probability(double bound) { return bound >= 1.0; }

ConfidenceReport confidence_radius(const BernsteinPair& pair_plus, const BernsteinPair& pair_minus,
                                   double N, double delta, double T);

/// Smallest horizon T whose confidence radius (for this pair) is at most r.
double min_time_for_radius(const BernsteinPair& pair, double N, double delta, double r);

/// (1/T) (log(1/c) + log(dmu_norm) + rel_entropy).
double eta_T(double c, double dmu_norm, double rel_entropy, double T);

/// psi_star_inv(pair, eta) + transient for each sign.
BiasBounds uq_bias_bound(const BernsteinPair& pair_plus, const BernsteinPair& pair_minus,
                         double eta, double transient);

/// Bound on |E^mu[F_T] - mu*[f]| for the baseline started from mu:
/// (C/c) (1 - exp(-T/alpha)) / (T/alpha) dmu_norm sqrt(Var).
double transient_term(const DerivedConstants& derived, double dmu_norm, double variance, double T);

/// Finite-horizon bias bound assembled from eta_T, uq_bias_bound and transient_term.
UQReport uq_report(const BernsteinPair& pair_plus, const BernsteinPair& pair_minus,
                   const DerivedConstants& derived, double dmu_norm, double variance,
                   double rel_entropy, double T);

}  // namespace hypoguard
