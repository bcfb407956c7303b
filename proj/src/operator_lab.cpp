#include "hypoguard/operator_lab.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

#include "hypoguard/bernstein.hpp"
#include "hypoguard/error.hpp"
#include "hypoguard/hypocoercivity.hpp"

namespace hypoguard {

double numerical_range_max(const Matrix& X) {
  const Matrix sym = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double LabProblem::V() const { return (0.5 * (M + M.transpose()) * x0).squaredNorm(); }

double LabProblem::K() const { return std::max(0.0, numerical_range_max(M)); }

void LabProblem::audit() const {
  if (dim < 2 || A.rows() != dim || M.rows() != dim || x0.size() != dim) {
    throw DomainError("LabProblem: inconsistent dimensions");
  }
  if (std::abs(x0.norm() - 1.0) > 1e-12) {
    throw DomainError("LabProblem: x0 is not a unit vector");
  }
  if (std::abs(x0.dot(M * x0)) > 1e-12) {
    throw DomainError("LabProblem: <M x0, x0> != 0");
  }
  // <A x, x> <= -|P_perp x|^2 / alpha  <=>  A + P_perp / alpha is negative semidefinite.
  const Matrix P_perp = Matrix::Identity(dim, dim) - x0 * x0.transpose();
  const double top = numerical_range_max(A + P_perp / alpha);
  if (top > 1e-10) {
    throw DomainError("LabProblem: gap hypothesis on A fails");
  }
}

LabProblem random_lab_problem(int dim, Engine& rng) {
  if (dim < 2) {
    throw DomainError("random_lab_problem: dim must be >= 2");
  }
  LabProblem prob;
  prob.dim = dim;
  prob.alpha = 0.5 + 1.5 * draw_uniform(rng);

  Matrix G(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      G(i, j) = draw_normal(rng);
    }
  }
  // Householder QR: Q's first column is +-G's first column normalized.
  const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
  prob.x0 = Q.col(0);

  Vector spectrum(dim);
  spectrum[0] = 0.0;
  for (int k = 1; k < dim; ++k) {
    spectrum[k] = -(1.0 + 2.0 * draw_uniform(rng)) / prob.alpha;
  }
  prob.A = Q * spectrum.asDiagonal() * Q.transpose();
  prob.A = 0.5 * (prob.A + prob.A.transpose());

  Matrix M(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      M(i, j) = draw_normal(rng);
    }
  }
  M -= prob.x0.dot(M * prob.x0) * (prob.x0 * prob.x0.transpose());
  prob.M = M;
  prob.audit();
  return prob;
}

PerturbLemmaReport verify_perturb_lemma(int dim, int trials, int grid_size, std::uint64_t seed) {
  if (dim < 2 || trials < 1 || grid_size < 1) {
    throw DomainError("verify_perturb_lemma: need dim >= 2, trials >= 1, grid_size >= 1");
  }
  PerturbLemmaReport rep;
  rep.dim = dim;
  rep.trials = trials;
  rep.grid_size = grid_size;
  rep.seed = seed;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  rep.min_slack = std::numeric_limits<double>::infinity();
  rep.max_slack = -std::numeric_limits<double>::infinity();
  const RngStreams streams(seed);
  for (int trial = 0; trial < trials; ++trial) {
    Engine rng = streams.replica(static_cast<std::uint64_t>(trial)).stream("lab");
    const LabProblem prob = random_lab_problem(dim, rng);
    const double V = prob.V();
    const double K = prob.K();
    const BernsteinPair pair{2.0 * prob.alpha * V, prob.alpha * K};
    // lambda grid on [0, 1/(alpha K)); without a pole use [0, 10].
    const double lambda_end = K > 0.0 ? 1.0 / (prob.alpha * K) : 10.0;
    for (int j = 0; j < grid_size; ++j) {
      const double lambda = lambda_end * static_cast<double>(j) / grid_size;
      const double lhs = numerical_range_max(prob.A + lambda * prob.M);
      const double rhs = psi(pair, lambda);
      const double slack = rhs - lhs;
      ++rep.checks;
      rep.max_violation = std::max(rep.max_violation, lhs - rhs);
      rep.min_slack = std::min(rep.min_slack, slack);
      rep.max_slack = std::max(rep.max_slack, slack);
      if (lhs > rhs + 1e-10) {
        ++rep.violations;
      }
      if (j == 1 && V > 0.0) {
        rep.small_lambda_ratio = std::max(rep.small_lambda_ratio, lhs / (lambda * lambda) / (prob.alpha * V));
      }
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

LambdaEigReport verify_lambda_eig(int trials, std::uint64_t seed) {
  if (trials < 1) {
    throw DomainError("verify_lambda_eig: trials must be >= 1");
  }
  LambdaEigReport rep;
  rep.trials = trials;
  rep.seed = seed;
  Engine rng = RngStreams(seed).stream("lambda_eig");
  for (int k = 0; k < trials; ++k) {
    HypoParams hp;
    hp.lambda_q = 0.05 + 0.95 * draw_uniform(rng);
    hp.lambda_p = 0.1 + 9.9 * draw_uniform(rng);
    hp.R0 = 5.0 * draw_uniform(rng);
    hp.eps = 0.999 * draw_uniform(rng);
    Eigen::Matrix2d mat;
    mat << hp.eps * hp.lambda_q, -0.5 * hp.eps * hp.R0, -0.5 * hp.eps * hp.R0, hp.lambda_p - hp.eps;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(mat, Eigen::EigenvaluesOnly);
    const double oracle = eig.eigenvalues().minCoeff();
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(lambda_of_eps(hp) - oracle));

    const double closed = eps_threshold_closed_form(hp.lambda_q, hp.lambda_p, hp.R0);
    const double bisected = eps_max(hp.lambda_q, hp.lambda_p, hp.R0);
    if (closed < 1.0) {
      ++rep.threshold_checks;
      rep.max_eps_max_deviation = std::max(rep.max_eps_max_deviation, std::abs(bisected - closed));
      HypoParams edge = hp;
      edge.eps = bisected;
      rep.max_abs_lambda_at_eps_max = std::max(rep.max_abs_lambda_at_eps_max, std::abs(lambda_of_eps(edge)));
    } else if (bisected != 1.0) {
      rep.max_eps_max_deviation = std::max(rep.max_eps_max_deviation, std::abs(bisected - 1.0));
    }
  }
  rep.pass = rep.max_abs_deviation < 1e-12 && rep.max_eps_max_deviation < 1e-9 &&
             rep.max_abs_lambda_at_eps_max < 1e-9;
  return rep;
}

}  // namespace hypoguard
