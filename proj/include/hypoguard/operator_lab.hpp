#pragma once

#include <cstdint>

#include "hypoguard/targets.hpp"

namespace hypoguard {

/// Finite-dimensional instance of the perturbation lemma's hypotheses:
/// A symmetric, A x0 = 0, <A x, x> <= -|P_perp x|^2 / alpha, and <M x0, x0> = 0.
struct LabProblem {
  int dim = 0;
  Matrix A;
  Matrix M;
  double alpha = 1.0;
  Vector x0;

  /// V = |(M + M^T) x0 / 2|^2.
  double V() const;
  /// K = max(0, sup_{|y| = 1} <M y, y>).
  double K() const;
  /// Throws DomainError if any hypothesis fails.
  void audit() const;
};

/// Random problem: orthonormal basis through x0, eigenvalue 0 on x0 and
/// uniform eigenvalues in [-3/alpha, -1/alpha] on its complement.
LabProblem random_lab_problem(int dim, Engine& rng);

/// Largest eigenvalue of (X + X^T) / 2, i.e. sup_{|x| = 1} <X x, x>.
double numerical_range_max(const Matrix& X);

struct PerturbLemmaReport {
  int dim = 0;
  int trials = 0;
  int grid_size = 0;
  std::uint64_t seed = 0;
  long long checks = 0;
  long long violations = 0;
  double max_violation = 0.0;  ///< max over checks of lhs - rhs (negative when all hold)
  double min_slack = 0.0;
  double max_slack = 0.0;
  /// Diagnostic: max over trials of (lhs / lambda^2) / (alpha V) at the smallest
  /// positive grid point; the bound predicts at most ~1.
  double small_lambda_ratio = 0.0;
  bool pass = false;
};

/// For random problems and a lambda grid in [0, 1/(alpha K)), checks
/// sup <(A + lambda M) x, x> <= Psi_{2 alpha V, alpha K}(lambda) + 1e-10.
PerturbLemmaReport verify_perturb_lemma(int dim, int trials, int grid_size, std::uint64_t seed);

struct LambdaEigReport {
  int trials = 0;
  std::uint64_t seed = 0;
  double max_abs_deviation = 0.0;       ///< |lambda_of_eps - eigensolver|
  double max_eps_max_deviation = 0.0;   ///< |eps_max - closed form| where closed form < 1
  double max_abs_lambda_at_eps_max = 0.0;
  int threshold_checks = 0;
  bool pass = false;
};

/// Randomized check of Lambda(eps) against a dense symmetric eigensolver, and
/// of eps_max against 4 lq lp / (4 lq + R0^2).
LambdaEigReport verify_lambda_eig(int trials, std::uint64_t seed);

}  // namespace hypoguard
