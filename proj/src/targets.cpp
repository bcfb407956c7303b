#include "hypoguard/targets.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "hypoguard/error.hpp"

namespace hypoguard {

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

TargetModel quadratic_target(std::string name, const Matrix& H, double beta) {
  if (H.rows() != H.cols() || H.rows() < 1) {
    throw DomainError("Hessian must be square and non-empty");
  }
  if (!H.isApprox(H.transpose(), 1e-12)) {
    throw DomainError("Hessian must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
  const double h_min = eig.eigenvalues().minCoeff();
  const double h_max = eig.eigenvalues().maxCoeff();
  if (!(h_min > 0.0)) {
    throw DomainError("Hessian must be positive definite");
  }
  TargetModel t;
  t.name = std::move(name);
  t.dim = static_cast<int>(H.rows());
  t.beta = beta;
  t.poincare_const = beta * h_min;
  t.hessian = H;
  t.potential = [H](const Vector& q) { return 0.5 * q.dot(H * q); };
  t.gradient = [H](const Vector& q) -> Vector { return H * q; };
  t.hessian_norm_bound = [h_max](const Vector&, const Vector&, double) { return h_max; };
  return t;
}

}  // namespace

Matrix TargetModel::covariance() const {
  if (!hessian) {
    throw DomainError(name + ": no closed-form stationary covariance");
  }
  return (beta * *hessian).inverse();
}

Vector TargetModel::sample_position(Engine& rng) const {
  const Matrix cov = covariance();
  const Eigen::LLT<Matrix> chol(cov);
  Vector z(dim);
  for (int i = 0; i < dim; ++i) {
    z[i] = draw_normal(rng);
  }
  return chol.matrixL() * z;
}

Density1D TargetModel::marginal_1d(int coordinate) const {
  if (coordinate < 0 || coordinate >= dim) {
    throw DomainError("marginal_1d: coordinate out of range");
  }
  if (hessian) {
    return gaussian_density_1d(0.0, std::sqrt(covariance()(coordinate, coordinate)));
  }
  if (dim != 1) {
    throw DomainError(name + ": marginals only available in one dimension");
  }
  const auto& V = potential;
  // exp(-beta V) is negligible once beta V exceeds ~60 above its minimum.
  double reach = 1.0;
  while (beta * (V(Vector::Constant(1, reach)) - V(Vector::Zero(1))) < 60.0 ||
         beta * (V(Vector::Constant(1, -reach)) - V(Vector::Zero(1))) < 60.0) {
    reach *= 1.5;
    if (reach > 1e6) {
      throw DomainError(name + ": potential does not confine");
    }
  }
  return gibbs_density_1d([V](double x) { return V(Vector::Constant(1, x)); }, beta, -reach, reach);
}

TargetModel builtin_target(std::string_view name, const TargetParams& params) {
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
    throw DomainError("beta must be finite and > 0");
  }
  if (name == "gaussian_iso") {
    if (params.dim < 1) {
      throw DomainError("gaussian_iso: dim must be >= 1");
    }
    if (!(params.h > 0.0)) {
      throw DomainError("gaussian_iso: h must be > 0");
    }
    return quadratic_target("gaussian_iso", params.h * Matrix::Identity(params.dim, params.dim),
                            params.beta);
  }
  if (name == "gaussian_aniso") {
    if (params.hessian) {
      return quadratic_target("gaussian_aniso", *params.hessian, params.beta);
    }
    if (params.h_diag.empty()) {
      throw DomainError("gaussian_aniso: needs h_diag or a Hessian");
    }
    const Vector diag = Eigen::Map<const Vector>(params.h_diag.data(),
                                                 static_cast<Eigen::Index>(params.h_diag.size()));
    return quadratic_target("gaussian_aniso", Matrix(diag.asDiagonal()), params.beta);
  }
  if (name == "double_well") {
    if (!params.poincare_const) {
      throw ConfigError("poincare_const", "double_well has no closed-form Poincare constant; supply one");
    }
    if (!(*params.poincare_const > 0.0)) {
      throw DomainError("poincare_const must be > 0");
    }
    TargetModel t;
    t.name = "double_well";
    t.dim = 1;
    t.beta = params.beta;
    t.poincare_const = *params.poincare_const;
    t.potential = [](const Vector& q) {
      const double s = q[0] * q[0] - 1.0;
      return 0.25 * s * s;
    };
    t.gradient = [](const Vector& q) -> Vector {
      Vector g(1);
      g[0] = q[0] * (q[0] * q[0] - 1.0);
      return g;
    };
    // V'' = 3 q^2 - 1 and q^2 is convex along a line, so the endpoints bound it.
    t.hessian_norm_bound = [](const Vector& q, const Vector& v, double window) {
      const double q0 = q[0];
      const double q1 = q[0] + window * v[0];
      return 3.0 * std::max(q0 * q0, q1 * q1) + 1.0;
    };
    return t;
  }
  throw DomainError("unknown target '" + std::string(name) + "'");
}

double estimate_poincare_1d(const std::function<double(double)>& potential, double beta, double lo,
                            double hi, int cells) {
  if (cells < 4 || !(hi > lo)) {
    throw DomainError("estimate_poincare_1d: bad grid");
  }
  const int n = cells + 1;
  const double dx = (hi - lo) / cells;
  double vmin = potential(lo);
  for (int i = 0; i < n; ++i) {
    vmin = std::min(vmin, potential(lo + i * dx));
  }
  auto rho = [&](double x) { return std::exp(-beta * (potential(x) - vmin)); };
  // Piecewise-linear elements: stiffness weighted by rho at cell midpoints,
  // lumped mass weighted by rho at nodes.
  Matrix K = Matrix::Zero(n, n);
  Matrix M = Matrix::Zero(n, n);
  for (int i = 0; i < cells; ++i) {
    const double w = rho(lo + (i + 0.5) * dx) / dx;
    K(i, i) += w;
    K(i + 1, i + 1) += w;
    K(i, i + 1) -= w;
    K(i + 1, i) -= w;
  }
  for (int i = 0; i < n; ++i) {
    const double end_factor = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    M(i, i) = rho(lo + i * dx) * dx * end_factor;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(K, M);
  // Eigenvalue 0 belongs to the constants; the next one is the spectral gap.
  return solver.eigenvalues()[1];
}

double MomentumModel::kappa_p() const noexcept {
  return kind == Kind::rademacher ? 1.0 : 1.0 / (mass * beta);
}

double MomentumModel::second_moment() const noexcept {
  return kind == Kind::rademacher ? 1.0 : mass / beta;
}

Vector MomentumModel::draw(Engine& rng, int dim) const {
  Vector p(dim);
  if (kind == Kind::rademacher) {
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < dim; ++i) {
      p[i] = coin(rng) ? 1.0 : -1.0;
    }
  } else {
    const double sd = std::sqrt(mass / beta);
    for (int i = 0; i < dim; ++i) {
      p[i] = sd * draw_normal(rng);
    }
  }
  return p;
}

MomentumModel gaussian_momentum(double mass, double beta) {
  if (!(mass > 0.0) || !(beta > 0.0)) {
    throw DomainError("gaussian momentum needs mass > 0 and beta > 0");
  }
  return MomentumModel{MomentumModel::Kind::gaussian, mass, beta};
}

MomentumModel rademacher_momentum() { return MomentumModel{MomentumModel::Kind::rademacher, 1.0, 1.0}; }

Observable builtin_observable(std::string_view name, const ObservableParams& params,
                              const TargetModel& target) {
  if (params.coordinate < 0 || params.coordinate >= target.dim) {
    throw DomainError("observable coordinate out of range");
  }
  Observable obs;
  obs.coordinate = params.coordinate;
  const bool gaussian = target.quadratic();
  const double sigma = gaussian ? std::sqrt(target.covariance()(params.coordinate, params.coordinate)) : 0.0;
  const double w = params.omega;

  if (name == "sin" || name == "cos") {
    if (!std::isfinite(w)) {
      throw DomainError("omega must be finite");
    }
    obs.name = std::string(name);
    if (name == "sin") {
      obs.f = [w](double x) { return std::sin(w * x); };
    } else {
      obs.f = [w](double x) { return std::cos(w * x); };
    }
    if (gaussian) {
      const double s2 = w * w * sigma * sigma;
      if (name == "sin") {
        obs.stats.mean = 0.0;
        obs.stats.variance = 0.5 * (1.0 - std::exp(-2.0 * s2));
      } else {
        obs.stats.mean = std::exp(-0.5 * s2);
        obs.stats.variance = 0.5 * (1.0 + std::exp(-2.0 * s2)) - std::exp(-s2);
      }
      obs.stats_closed_form = true;
    }
  } else if (name == "indicator") {
    if (!(params.b > params.a)) {
      throw DomainError("indicator needs a < b");
    }
    const double a = params.a;
    const double b = params.b;
    obs.name = "indicator";
    obs.f = [a, b](double x) { return (x >= a && x <= b) ? 1.0 : 0.0; };
    obs.kinks = {a, b};
    if (gaussian) {
      const double p = std_normal_cdf(b / sigma) - std_normal_cdf(a / sigma);
      obs.stats.mean = p;
      obs.stats.variance = p * (1.0 - p);
      obs.stats_closed_form = true;
    }
  } else if (name == "clipped_coord") {
    if (!(params.clip > 0.0) || !std::isfinite(params.clip)) {
      throw DomainError("clipped_coord needs a finite clip level > 0");
    }
    const double L = params.clip;
    obs.name = "clipped_coord";
    obs.f = [L](double x) { return std::clamp(x, -L, L); };
    obs.kinks = {-L, L};
    if (gaussian) {
      const double c = L / sigma;
      const double inner = sigma * sigma * ((2.0 * std_normal_cdf(c) - 1.0) - 2.0 * c * std_normal_pdf(c));
      obs.stats.mean = 0.0;
      obs.stats.variance = inner + 2.0 * L * L * (1.0 - std_normal_cdf(c));
      obs.stats_closed_form = true;
    }
  } else if (name == "coord" || name == "identity" || name == "raw_coord") {
    throw DomainError("unbounded observable '" + std::string(name) +
                      "' rejected: guarantees need bounded f, use clipped_coord");
  } else {
    throw DomainError("unknown observable '" + std::string(name) + "'");
  }

  if (!obs.stats_closed_form) {
    const Density1D law = target.marginal_1d(params.coordinate);
    const auto& f = obs.f;
    const double mean = law.expect(f, obs.kinks);
    const double second = law.expect([&f](double x) { return f(x) * f(x); }, obs.kinks);
    obs.stats.mean = mean;
    obs.stats.variance = std::max(0.0, second - mean * mean);
  }
  const double m = obs.stats.mean;
  if (obs.name == "indicator") {
    obs.stats.sup_norm = std::max(m, 1.0 - m);
  } else if (obs.name == "clipped_coord") {
    obs.stats.sup_norm = params.clip + std::abs(m);
  } else {
    obs.stats.sup_norm = 1.0 + std::abs(m);
  }
  return obs;
}

double gaussian_chi_square_norm(double mean0, double sd0, double sigma) {
  if (!(sd0 > 0.0) || !(sigma > 0.0)) {
    throw DomainError("gaussian_chi_square_norm: standard deviations must be > 0");
  }
  const double gap = 2.0 * sigma * sigma - sd0 * sd0;
  if (!(gap > 0.0)) {
    throw DivergentNormError("gaussian_chi_square_norm: sd0^2 >= 2 sigma^2, the density ratio is not in L^2");
  }
  const double squared = sigma * sigma / (sd0 * std::sqrt(gap)) * std::exp(mean0 * mean0 / gap);
  return std::sqrt(squared);
}

}  // namespace hypoguard
