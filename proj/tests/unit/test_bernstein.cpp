#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support/oracles.hpp"
#include "hypoguard/bernstein.hpp"
#include "hypoguard/error.hpp"

using namespace hypoguard;

TEST_CASE("psi at reference points") {
  CHECK(psi({2.0, 1.0}, 0.0) == 0.0);
  CHECK(psi({2.0, 0.0}, 3.0) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(psi({2.0, 1.0}, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::isinf(psi({2.0, 1.0}, 1.0)));
  CHECK(std::isinf(psi({2.0, 1.0}, 3.0)));
  CHECK_THROWS_AS(psi({2.0, 1.0}, -0.1), DomainError);
}

TEST_CASE("psi_star at reference points") {
  CHECK(psi_star({2.0, 1.0}, 0.0) == 0.0);
  CHECK(psi_star({2.0, 0.0}, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(psi_star({2.0, 1.0}, 2.0) == doctest::Approx(2.0 * (2.0 - std::sqrt(3.0))).epsilon(1e-14));
  CHECK(psi_star({0.0, 2.0}, 3.0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK_THROWS_AS(psi_star({2.0, 1.0}, -1.0), DomainError);
  CHECK_THROWS_AS(psi_star({0.0, 0.0}, 1.0), DegeneratePairError);
  CHECK_THROWS_AS(psi_star({-1.0, 1.0}, 1.0), DomainError);
}

TEST_CASE("psi_star_inv at reference points") {
  CHECK(psi_star_inv({2.0, 1.0}, 0.0) == 0.0);
  CHECK(psi_star_inv({2.0, 1.0}, 2.0) == doctest::Approx(std::sqrt(8.0) + 2.0).epsilon(1e-15));
  CHECK(psi_star_inv({0.0, 1.0}, 3.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(psi_star_inv({2.0, 1.0}, -1e-3), DomainError);
}

TEST_CASE("property: psi_star equals the numerical Legendre supremum") {
  oracle::Gen gen(11);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = gen.log_uniform(1e-3, 1e2);
    const double b = gen.integer(0, 9) == 0 ? 0.0 : gen.log_uniform(1e-3, 1e2);
    const double r = gen.log_uniform(1e-3, 1e2);
    const double expected = oracle::legendre_sup(v, b, r);
    const double got = psi_star({v, b}, r);
    worst = std::max(worst, std::abs(got - expected) / expected);
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("property: psi_star_inv inverts psi_star") {
  oracle::Gen gen(12);
  for (int i = 0; i < 1000; ++i) {
    const BernsteinPair pair{gen.log_uniform(1e-3, 1e2), gen.log_uniform(1e-3, 1e2)};
    const double r = gen.log_uniform(1e-4, 1e3);
    CHECK(psi_star_inv(pair, psi_star(pair, r)) == doctest::Approx(r).epsilon(1e-10));
  }
}

TEST_CASE("property: psi is convex and increasing on its domain, psi_star increasing") {
  oracle::Gen gen(13);
  for (int i = 0; i < 200; ++i) {
    const BernsteinPair pair{gen.log_uniform(1e-2, 10.0), gen.log_uniform(1e-2, 10.0)};
    const double end = 1.0 / pair.b;
    double prev = -1.0;
    for (int k = 1; k < 20; ++k) {
      const double l = end * k / 20.0;
      const double h = end / 80.0;
      CHECK(psi(pair, l) > prev);
      prev = psi(pair, l);
      CHECK(psi(pair, l - h) - 2.0 * psi(pair, l) + psi(pair, l + h) >= -1e-12 * psi(pair, l));
    }
    CHECK(psi_star(pair, 1.0) < psi_star(pair, 2.0));
  }
}
