#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support/oracles.hpp"
#include "hypoguard/error.hpp"
#include "hypoguard/hypocoercivity.hpp"

using namespace hypoguard;

TEST_CASE("Lambda(eps) at reference points") {
  CHECK(lambda_of_eps({1.0, 0.5, 0.0, 0.5}) == doctest::Approx(0.25).epsilon(1e-15));
  oracle::Gen gen(21);
  for (int i = 0; i < 20; ++i) {
    CHECK(std::abs(lambda_of_eps({gen.uniform(0.1, 5), gen.uniform(0.05, 1), gen.uniform(0, 5), 0.0})) < 1e-15);
  }
}

TEST_CASE("property: Lambda(eps) equals the smallest eigenvalue of the 2x2 matrix") {
  oracle::Gen gen(22);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const HypoParams p{gen.uniform(0.1, 10.0), gen.uniform(0.05, 1.0), gen.uniform(0.0, 5.0), gen.uniform(0.0, 0.999)};
    const double expected = oracle::smallest_eig_2x2(p.eps * p.lambda_q, -p.eps * p.R0 / 2.0, p.lambda_p - p.eps);
    worst = std::max(worst, std::abs(lambda_of_eps(p) - expected));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("eps_max at reference points") {
  CHECK(eps_max(1.0, 0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eps_max(1.0, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(eps_max(1.0, 10.0, 0.0) == 1.0);
  CHECK(eps_threshold_closed_form(1.0, 1.0, 2.0) == doctest::Approx(0.5));
}

TEST_CASE("property: eps_max agrees with the positivity threshold and Lambda vanishes there") {
  oracle::Gen gen(23);
  for (int i = 0; i < 2000; ++i) {
    const double lq = gen.uniform(0.05, 1.0), lp = gen.uniform(0.1, 10.0), R0 = gen.uniform(0.0, 5.0);
    // independent threshold: det = eps^2 (lq + R0^2/4) - eps lq lp changes sign at
    // eps = lq lp / (lq + R0^2/4).
    const double threshold = lq * lp / (lq + 0.25 * R0 * R0);
    if (threshold < 1.0) {
      const double e = eps_max(lq, lp, R0);
      CHECK(std::abs(e - threshold) < 1e-9);
      CHECK(std::abs(lambda_of_eps({lp, lq, R0, e})) < 1e-9);
    }
  }
}

TEST_CASE("optimal_eps maximizes Lambda") {
  const double e = optimal_eps(0.5, 1.0, 0.0);
  CHECK(e == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
  CHECK(lambda_of_eps({1.0, 0.5, 0.0, e}) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(lambda_of_eps({1.0, 1.0, 2.0, optimal_eps(1.0, 1.0, 2.0)}) > 0.0);

  oracle::Gen gen(24);
  for (int i = 0; i < 50; ++i) {
    const double lq = gen.uniform(0.05, 1.0), lp = gen.uniform(0.1, 10.0), R0 = gen.uniform(0.0, 5.0);
    const double best = lambda_of_eps({lp, lq, R0, optimal_eps(lq, lp, R0)});
    const double top = std::min(eps_max(lq, lp, R0), kDefaultEpsCap);
    for (int k = 0; k < 100; ++k) {
      CHECK(lambda_of_eps({lp, lq, R0, gen.uniform(0.0, top)}) <= best + 1e-12);
    }
  }
}

TEST_CASE("lambda_q from a target Poincare constant") {
  CHECK(lambda_q_from_target(std::numeric_limits<double>::infinity(), 0.7) == 1.0);
  CHECK(lambda_q_from_target(1.0, 1.0) == doctest::Approx(0.5));
  CHECK(lambda_q_from_target(3.0, 1.0) == doctest::Approx(0.75));
  CHECK_THROWS_AS(lambda_q_from_target(-1.0, 1.0), DomainError);
}

TEST_CASE("Bernstein constants at the eps = 1/2 reference point") {
  const HypoBernstein hb = bernstein_from_hypo({1.0, 0.5, 0.0, 0.5}, {0.0, 1.0, 1.0}, 1.0);
  CHECK(hb.derived.Lambda == doctest::Approx(0.25));
  CHECK(hb.pair.v == doctest::Approx(22.5).epsilon(1e-14));
  CHECK(hb.pair.b == doctest::Approx(18.0).epsilon(1e-14));
  CHECK(hb.N == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(hb.derived.alpha == doctest::Approx(6.0));

  const HypoBernstein constant = bernstein_from_hypo({1.0, 0.5, 0.0, 0.5}, {3.0, 0.0, 0.0}, 1.0);
  CHECK(constant.pair.v == 0.0);
}

TEST_CASE("inadmissible parameters are rejected") {
  CHECK_THROWS_AS(bernstein_from_hypo({1.0, 1.0, 2.0, 0.7}, {0.0, 1.0, 1.0}, 1.0), AdmissibilityError);
  CHECK_THROWS_AS(derived_constants({1.0, 1.0, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(bernstein_from_hypo({1.0, 0.5, 0.0, 0.5}, {0.0, 2.0, 1.0}, 1.0), DomainError);
}

TEST_CASE("property: v and b are nonincreasing in Lambda") {
  // At fixed eps, larger lambda_p can only raise Lambda.
  oracle::Gen gen(25);
  for (int i = 0; i < 500; ++i) {
    const double lq = gen.uniform(0.05, 1.0), R0 = gen.uniform(0.0, 2.0);
    const double lp1 = gen.uniform(1.0, 5.0), lp2 = lp1 + gen.uniform(0.0, 5.0);
    const double eps = gen.uniform(0.01, 0.99) * std::min(eps_max(lq, lp1, R0), kDefaultEpsCap);
    const ObservableStats stats{0.0, 0.5, 1.0};
    const HypoBernstein a = bernstein_from_hypo({lp1, lq, R0, eps}, stats, 1.0);
    const HypoBernstein b = bernstein_from_hypo({lp2, lq, R0, eps}, stats, 1.0);
    REQUIRE(b.derived.Lambda >= a.derived.Lambda);
    CHECK(b.pair.v <= a.pair.v * (1 + 1e-14));
    CHECK(b.pair.b <= a.pair.b * (1 + 1e-14));
  }
}
