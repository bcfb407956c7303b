#include "hypoguard/hypocoercivity.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hypoguard/error.hpp"

namespace hypoguard {

namespace {

// Lambda for any eps >= 0, including eps = 1 (used as a bisection bracket).
double lambda_raw(double lq, double lp, double R0, double eps) {
  const double trace = (lq - 1.0) * eps + lp;
  const double gap = (lq + 1.0) * eps - lp;
  const double disc = std::sqrt(gap * gap + eps * eps * R0 * R0);
  if (trace > 0.0) {
    // trace^2 - disc^2 = 4 det; avoids cancellation near the admissibility edge.
    const double det = eps * (lq * lp - eps * (lq + 0.25 * R0 * R0));
    return 2.0 * det / (trace + disc);
  }
  return 0.5 * (trace - disc);
}

void check_model_constants(double lq, double lp, double R0) {
  if (!(lp > 0.0) || !std::isfinite(lp)) {
    throw DomainError("lambda_p must be finite and > 0");
  }
  if (!(lq > 0.0 && lq <= 1.0)) {
    throw DomainError("lambda_q must lie in (0, 1]");
  }
  if (!(R0 >= 0.0) || !std::isfinite(R0)) {
    throw DomainError("R0 must be finite and >= 0");
  }
}

}  // namespace

void HypoParams::validate() const {
  check_model_constants(lambda_q, lambda_p, R0);
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw DomainError("eps must lie in (0, 1)");
  }
}

void ObservableStats::validate() const {
  if (!std::isfinite(mean)) {
    throw DomainError("observable mean must be finite");
  }
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw DomainError("observable variance must be finite and >= 0");
  }
  if (!(sup_norm >= 0.0) || !std::isfinite(sup_norm)) {
    throw DomainError("observable sup_norm must be finite and >= 0");
  }
  // Var <= ||f - mean||_inf^2 for any bounded f; allow rounding slack.
  if (variance > sup_norm * sup_norm * (1.0 + 1e-12) + 1e-300) {
    std::ostringstream msg;
    msg << "observable variance " << variance << " exceeds sup_norm^2 " << sup_norm * sup_norm;
    throw DomainError(msg.str());
  }
}

double lambda_of_eps(const HypoParams& params) {
  params.validate();
  return lambda_raw(params.lambda_q, params.lambda_p, params.R0, params.eps);
}

double eps_threshold_closed_form(double lambda_q, double lambda_p, double R0) {
  check_model_constants(lambda_q, lambda_p, R0);
  return 4.0 * lambda_q * lambda_p / (4.0 * lambda_q + R0 * R0);
}

double eps_max(double lambda_q, double lambda_p, double R0) {
  check_model_constants(lambda_q, lambda_p, R0);
  if (lambda_raw(lambda_q, lambda_p, R0, 1.0) > 0.0) {
    return 1.0;
  }
  // Lambda(eps) > 0 on (0, root) and <= 0 on [root, 1].
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (lambda_raw(lambda_q, lambda_p, R0, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double optimal_eps(double lambda_q, double lambda_p, double R0, double cap) {
  if (!(cap > 0.0 && cap < 1.0)) {
    throw DomainError("optimal_eps: cap must lie in (0, 1)");
  }
  double hi = std::min(eps_max(lambda_q, lambda_p, R0), cap);
  double lo = 0.0;
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = lambda_raw(lambda_q, lambda_p, R0, x1);
  double f2 = lambda_raw(lambda_q, lambda_p, R0, x2);
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = lambda_raw(lambda_q, lambda_p, R0, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = lambda_raw(lambda_q, lambda_p, R0, x1);
    }
  }
  return 0.5 * (lo + hi);
}

double lambda_q_from_target(double C_nu, double kappa_p) {
  if (!(C_nu > 0.0)) {
    throw DomainError("lambda_q_from_target: C_nu must be > 0");
  }
  if (!(kappa_p > 0.0) || !std::isfinite(kappa_p)) {
    throw DomainError("lambda_q_from_target: kappa_p must be finite and > 0");
  }
  if (std::isinf(C_nu)) {
    return 1.0;
  }
  const double x = kappa_p * C_nu;
  return x / (1.0 + x);
}

DerivedConstants derived_constants(const HypoParams& params) {
  const double Lambda = lambda_of_eps(params);
  if (!(Lambda > 0.0)) {
    std::ostringstream msg;
    msg << "inadmissible eps = " << params.eps << ": Lambda(eps) = " << Lambda
        << " <= 0 (eps_max = " << eps_max(params.lambda_q, params.lambda_p, params.R0) << ")";
    throw AdmissibilityError(msg.str());
  }
  DerivedConstants out;
  out.Lambda = Lambda;
  out.c = std::sqrt(1.0 - params.eps);
  out.C = std::sqrt(1.0 + params.eps);
  out.alpha = (1.0 + params.eps) / Lambda;
  return out;
}

HypoBernstein bernstein_from_hypo(const HypoParams& params, const ObservableStats& stats,
                                  double dmu_norm) {
  stats.validate();
  if (!(dmu_norm >= 1.0) || !std::isfinite(dmu_norm)) {
    throw DomainError("dmu_norm must be finite and >= 1");
  }
  HypoBernstein out;
  out.derived = derived_constants(params);
  const double eps = params.eps;
  const double Lambda = out.derived.Lambda;
  out.pair.v = (1.0 + eps) * (1.0 - 0.25 * eps * eps) / (1.0 - eps) * 2.0 * stats.variance / Lambda;
  out.pair.b = (1.0 + eps) * (1.0 + eps) / (1.0 - eps) * stats.sup_norm / Lambda;
  out.N = dmu_norm / std::sqrt(1.0 - eps);
  return out;
}

}  // namespace hypoguard
