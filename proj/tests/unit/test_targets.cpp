#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "hypoguard/error.hpp"
#include "hypoguard/targets.hpp"

using namespace hypoguard;

namespace {

TargetModel gaussian_1d(double h, double beta) {
  TargetParams p;
  p.h = h;
  p.beta = beta;
  return builtin_target("gaussian_iso", p);
}

}  // namespace

TEST_CASE("Poincare constants of the Gaussian targets") {
  CHECK(gaussian_1d(1.0, 2.0).poincare_const == doctest::Approx(2.0));
  TargetParams p;
  p.h_diag = {1.0, 4.0};
  p.dim = 2;
  CHECK(builtin_target("gaussian_aniso", p).poincare_const == doctest::Approx(1.0));
  p.h_diag = {};
  p.hessian = Matrix{{2.0, 1.0}, {1.0, 2.0}};
  p.beta = 0.5;
  CHECK(builtin_target("gaussian_aniso", p).poincare_const == doctest::Approx(0.5));
  p.hessian = Matrix{{1.0, 2.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(builtin_target("gaussian_aniso", p), DomainError);
}

TEST_CASE("FEM Poincare estimate recovers the Gaussian constant") {
  const double est = estimate_poincare_1d([](double q) { return q * q; }, 1.0, -8.0, 8.0, 800);
  CHECK(est == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("double well") {
  TargetParams p;
  CHECK_THROWS_AS(builtin_target("double_well", p), ConfigError);
  try {
    builtin_target("double_well", p);
  } catch (const ConfigError& e) {
    CHECK(e.field() == "poincare_const");
  }
  p.poincare_const = 0.4;
  const TargetModel dw = builtin_target("double_well", p);
  CHECK(dw.gradient(Vector::Constant(1, 2.0))[0] == doctest::Approx(6.0));
  CHECK_FALSE(dw.quadratic());

  oracle::Gen gen(41);
  for (int i = 0; i < 500; ++i) {
    const Vector q = Vector::Constant(1, gen.uniform(-3, 3));
    const Vector v = Vector::Constant(1, gen.uniform(-2, 2));
    const double w = gen.uniform(0.01, 1.0);
    const double bound = dw.hessian_norm_bound(q, v, w);
    for (int k = 0; k <= 10; ++k) {
      const double x = q[0] + v[0] * w * k / 10.0;
      CHECK(std::abs(3.0 * x * x - 1.0) <= bound + 1e-12);
    }
  }
}

TEST_CASE("property: gradients match finite differences of the potential") {
  TargetParams p;
  p.dim = 3;
  p.h_diag = {0.5, 1.0, 3.0};
  p.poincare_const = 0.3;
  oracle::Gen gen(42);
  for (const char* name : {"gaussian_iso", "gaussian_aniso", "double_well"}) {
    const TargetModel t = builtin_target(name, p);
    for (int i = 0; i < 50; ++i) {
      Vector q(t.dim);
      for (int j = 0; j < t.dim; ++j) q[j] = gen.uniform(-2, 2);
      const Vector g = t.gradient(q);
      for (int j = 0; j < t.dim; ++j) {
        const double h = 1e-5;
        Vector a = q, b = q;
        a[j] += h;
        b[j] -= h;
        CHECK(g[j] == doctest::Approx((t.potential(a) - t.potential(b)) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("exact draws from a Gaussian target have the right moments") {
  TargetParams p;
  p.hessian = Matrix{{2.0, 0.5}, {0.5, 1.0}};
  p.beta = 1.5;
  const TargetModel t = builtin_target("gaussian_aniso", p);
  Engine rng(43);
  Matrix acc = Matrix::Zero(2, 2);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const Vector x = t.sample_position(rng);
    acc += x * x.transpose();
  }
  const Matrix cov = (p.beta * *p.hessian).inverse();
  CHECK(((acc / n) - cov).cwiseAbs().maxCoeff() < 0.01);
  CHECK((t.covariance() - cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("observable statistics") {
  const TargetModel t = gaussian_1d(1.0, 1.0);
  ObservableParams op;
  const Observable s = builtin_observable("sin", op, t);
  CHECK(s.stats.mean == 0.0);
  const Observable c = builtin_observable("cos", op, t);
  CHECK(c.stats.mean == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  const double second = oracle::gaussian_expectation([](double x) { return std::cos(x) * std::cos(x); }, 0, 1);
  CHECK(c.stats.variance == doctest::Approx(second - std::exp(-1.0)).epsilon(1e-10));
  CHECK(c.stats.sup_norm == doctest::Approx(1.0 + std::exp(-0.5)));

  op.a = -0.3;
  op.b = 1.2;
  const Observable ind = builtin_observable("indicator", op, t);
  CHECK(ind.stats.mean == doctest::Approx(oracle::normal_cdf(1.2) - oracle::normal_cdf(-0.3)).epsilon(1e-14));
  const double quad = oracle::integrate_finite([](double x) { return std::exp(-0.5 * x * x); }, -0.3, 1.2) /
                      std::sqrt(2 * M_PI);
  CHECK(ind.stats.mean == doctest::Approx(quad).epsilon(1e-10));

  op.clip = 0.7;
  const Observable clip = builtin_observable("clipped_coord", op, t);
  const double clip_var = oracle::gaussian_expectation(
      [](double x) {
        const double y = std::clamp(x, -0.7, 0.7);
        return y * y;
      },
      0, 1, {-0.7, 0.7});
  CHECK(clip.stats.variance == doctest::Approx(clip_var).epsilon(1e-8));
  CHECK(clip.stats.sup_norm == doctest::Approx(0.7));

  CHECK_THROWS_AS(builtin_observable("coord", op, t), DomainError);
  CHECK_THROWS_AS(builtin_observable("nope", op, t), DomainError);
}

TEST_CASE("observable statistics by quadrature on a non-Gaussian target") {
  TargetParams p;
  p.poincare_const = 0.3;
  const TargetModel dw = builtin_target("double_well", p);
  const Observable c = builtin_observable("cos", ObservableParams{}, dw);
  const auto w = [](double q) { return std::exp(-(0.25 * q * q * q * q - 0.5 * q * q)); };
  const double Z = oracle::integrate_real_line(w);
  const double mean = oracle::integrate_real_line([&](double q) { return std::cos(q) * w(q); }) / Z;
  CHECK(c.stats.mean == doctest::Approx(mean).epsilon(1e-8));
}

TEST_CASE("chi-square norm of a Gaussian start") {
  CHECK(gaussian_chi_square_norm(0.0, 1.3, 1.3) == doctest::Approx(1.0).epsilon(1e-15));
  const double sigma = 1.0;
  const auto oracle_norm = [&](double m0, double s) {
    const double sq = oracle::integrate_real_line([&](double x) {
      const double log_mu = -0.5 * (x - m0) * (x - m0) / (s * s) - std::log(s);
      const double log_nu = -0.5 * x * x / (sigma * sigma) - std::log(sigma);
      return std::exp(2.0 * log_mu - log_nu);
    }) / std::sqrt(2 * M_PI);
    return std::sqrt(sq);
  };
  CHECK(gaussian_chi_square_norm(0.0, std::sqrt(0.5), sigma) == doctest::Approx(oracle_norm(0.0, std::sqrt(0.5))).epsilon(1e-8));
  CHECK(gaussian_chi_square_norm(0.7, 0.8, sigma) == doctest::Approx(oracle_norm(0.7, 0.8)).epsilon(1e-8));
  double prev = 0.0;
  for (double s2 = 1.0; s2 < 2.0; s2 += 0.1) {
    const double n = gaussian_chi_square_norm(0.0, std::sqrt(s2), sigma);
    CHECK(n > prev);
    prev = n;
  }
  CHECK(gaussian_chi_square_norm(0.0, std::sqrt(1.999999), sigma) > 25.0);
  CHECK_THROWS_AS(gaussian_chi_square_norm(0.0, std::sqrt(2.0), sigma), DivergentNormError);
}

TEST_CASE("momentum laws") {
  CHECK(rademacher_momentum().kappa_p() == 1.0);
  const MomentumModel g = gaussian_momentum(2.0, 0.5);
  CHECK(g.second_moment() == doctest::Approx(4.0));
  CHECK(g.kappa_p() == doctest::Approx(1.0));
  Engine rng(44);
  const Vector v = rademacher_momentum().draw(rng, 1000);
  CHECK(v.cwiseAbs().minCoeff() == 1.0);
  CHECK(v.cwiseAbs().maxCoeff() == 1.0);
}
