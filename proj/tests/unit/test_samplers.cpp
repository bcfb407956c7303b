#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "hypoguard/error.hpp"
#include "hypoguard/samplers.hpp"

using namespace hypoguard;

namespace {

TargetModel gaussian(int dim, double h, double beta = 1.0) {
  TargetParams p;
  p.dim = dim;
  p.h = h;
  p.beta = beta;
  return builtin_target("gaussian_iso", p);
}

bool same(const Trajectory& a, const Trajectory& b) {
  if (a.segments.size() != b.segments.size() || a.events.size() != b.events.size()) return false;
  for (std::size_t k = 0; k < a.segments.size(); ++k) {
    if (a.segments[k].start.q != b.segments[k].start.q || a.segments[k].start.p != b.segments[k].start.p ||
        a.segments[k].duration != b.segments[k].duration)
      return false;
  }
  return a.final_state.q == b.final_state.q && a.final_state.p == b.final_state.p;
}

}  // namespace

TEST_CASE("reflection") {
  const Vector g = Vector::Constant(3, 1.0);
  CHECK((reflect(2.0 * g, g) + 2.0 * g).norm() < 1e-15);
  Vector perp(3);
  perp << 1.0, -1.0, 0.0;
  CHECK((reflect(perp, g) - perp).norm() < 1e-15);
  oracle::Gen gen(51);
  for (int i = 0; i < 1000; ++i) {
    Vector p(4), grad(4);
    for (int j = 0; j < 4; ++j) {
      p[j] = gen.normal();
      grad[j] = gen.normal();
    }
    const Vector r = reflect(p, grad);
    CHECK(std::abs(r.norm() - p.norm()) < 1e-12);
    CHECK((reflect(r, grad) - p).norm() < 1e-12);
    CHECK(r.dot(grad) == doctest::Approx(-p.dot(grad)).epsilon(1e-12));
  }
}

TEST_CASE("flip") {
  Vector v(2);
  v << 1.0, 1.0;
  const Vector f = flip(v, 0);
  CHECK(f[0] == -1.0);
  CHECK(f[1] == 1.0);
  CHECK(flip(f, 0) == v);
}

TEST_CASE("affine event time inversion") {
  CHECK(first_event_time_affine(1.0, 1.0, 1.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::isinf(first_event_time_affine(-1.0, 0.0, 0.3)));
  CHECK(first_event_time_affine(2.0, 0.0, 1.0) == doctest::Approx(0.5));
  // starts negative: zero rate until s = 1, then (s - 1)
  CHECK(first_event_time_affine(-1.0, 1.0, 0.5) == doctest::Approx(2.0));
  // decreasing rate whose total mass 1/2 is below the draw
  CHECK(std::isinf(first_event_time_affine(1.0, -1.0, 0.6)));
  CHECK(first_event_time_affine(1.0, -1.0, 0.375) == doctest::Approx(0.5));
  oracle::Gen gen(52);
  for (int i = 0; i < 1000; ++i) {
    const double a = gen.uniform(-2, 2), b = gen.uniform(-2, 2), E = gen.uniform(0.01, 3);
    const double tau = first_event_time_affine(a, b, E);
    if (std::isfinite(tau)) {
      const auto r = [&](double s) { return std::max(0.0, a + b * s); };
      const double kink = b != 0.0 ? -a / b : -1.0;
      const double mass = kink > 0.0 && kink < tau
                              ? oracle::integrate_finite(r, 0.0, kink) + oracle::integrate_finite(r, kink, tau)
                              : oracle::integrate_finite(r, 0.0, tau);
      CHECK(mass == doctest::Approx(E).epsilon(1e-8));
    }
  }
}

TEST_CASE("thinning and exact inversion sample the same first event time") {
  const double a = 0.5, b = 1.0;  // 1-D quadratic V, h = 1, q = 0.5, v = 1
  const auto rate = [&](double s) { return std::max(0.0, a + b * s); };
  // a deliberately loose envelope
  const auto bound = [&](double s0, double) { return LocalBound{std::max(0.0, a + b * s0) + 0.7, b}; };
  Engine thin_rng(53), exact_rng(54);
  std::vector<double> thinned, exact;
  for (int i = 0; i < 10000; ++i) {
    thinned.push_back(first_event_time_thinned(rate, bound, 0.5, 1e9, thin_rng));
    exact.push_back(first_event_time_affine(a, b, draw_exp1(exact_rng)));
  }
  CHECK(oracle::ks_two_sample(thinned, exact) < 0.02);
  const auto cdf = [&](double t) { return 1.0 - std::exp(-(a * t + 0.5 * b * t * t)); };
  CHECK(oracle::ks_one_sample(thinned, cdf) < 0.02);
  CHECK(oracle::ks_one_sample(exact, cdf) < 0.02);
}

TEST_CASE("thinning detects an envelope that is too low") {
  Engine rng(55);
  const auto rate = [](double s) { return 1.0 + s; };
  const auto bad = [](double, double) { return LocalBound{0.5, 0.0}; };
  CHECK_THROWS_AS(
      {
        for (int i = 0; i < 100; ++i) first_event_time_thinned(rate, bad, 0.5, 1e9, rng);
      },
      BoundViolationError);
}

TEST_CASE("BPS bounces preserve speed and the trajectory is reproducible") {
  const TargetModel t = gaussian(3, 1.5);
  const Trajectory tr = simulate_bps(t, gaussian_momentum(1.0, 1.0), 0.5, 100.0, 7);
  CHECK(tr.count(EventKind::bounce) > 10);
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::bounce) {
      CHECK(std::abs(e.post_velocity.norm() - e.pre_velocity.norm()) < 1e-12);
    }
  }
  CHECK(same(tr, simulate_bps(t, gaussian_momentum(1.0, 1.0), 0.5, 100.0, 7)));
  CHECK_FALSE(same(tr, simulate_bps(t, gaussian_momentum(1.0, 1.0), 0.5, 100.0, 8)));
  // segments tile [0, T]
  double t_end = 0.0;
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    CHECK(tr.segments[k].start.t == doctest::Approx(t_end).epsilon(1e-12));
    t_end += tr.segments[k].duration;
  }
  CHECK(t_end == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("BPS on a flat potential only refreshes and moves linearly") {
  TargetModel flat = gaussian(2, 1.0);
  flat.name = "flat";
  flat.potential = [](const Vector&) { return 0.0; };
  flat.gradient = [](const Vector& q) { return Vector::Zero(q.size()).eval(); };
  flat.hessian = Matrix::Zero(2, 2);
  flat.hessian_norm_bound = [](const Vector&, const Vector&, double) { return 0.0; };
  SimOptions opts;
  opts.initial.kind = InitialCondition::Kind::fixed;
  opts.initial.q0 = Vector::Zero(2);
  const Trajectory tr = simulate_bps(flat, gaussian_momentum(1.0, 1.0), 1.0, 20.0, 3, opts);
  CHECK(tr.count(EventKind::bounce) == 0);
  CHECK(tr.count(EventKind::refresh) > 0);
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const auto& s = tr.segments[k];
    const PhasePoint end = tr.segment_end(k);
    CHECK((end.q - (s.start.q + s.duration * s.start.p)).norm() < 1e-12);
  }
}

TEST_CASE("zig-zag flips a single component per event") {
  TargetParams p;
  p.dim = 3;
  p.h_diag = {1.0, 2.0, 0.5};
  const TargetModel t = builtin_target("gaussian_aniso", p);
  const Trajectory tr = simulate_zigzag(t, 0.3, 50.0, 9);
  CHECK(tr.count(EventKind::flip) > 10);
  for (const auto& e : tr.events) {
    CHECK(e.post_velocity.cwiseAbs().minCoeff() == 1.0);
    if (e.kind == EventKind::flip) {
      int changed = 0;
      for (int j = 0; j < 3; ++j) changed += e.pre_velocity[j] != e.post_velocity[j];
      CHECK(changed == 1);
      CHECK(e.post_velocity[e.component] == -e.pre_velocity[e.component]);
    }
  }
}

TEST_CASE("zig-zag by thinning on a double well is reproducible") {
  TargetParams p;
  p.poincare_const = 0.3;
  const TargetModel t = builtin_target("double_well", p);
  SimOptions opts;
  opts.initial.kind = InitialCondition::Kind::fixed;
  opts.initial.q0 = Vector::Constant(1, 0.3);
  const Trajectory a = simulate_zigzag(t, 1.0, 50.0, 4, opts);
  CHECK(a.count(EventKind::flip) > 0);
  CHECK(same(a, simulate_zigzag(t, 1.0, 50.0, 4, opts)));
  CHECK_THROWS_AS(simulate_zigzag(t, 1.0, 50.0, 4), DomainError);
}

TEST_CASE("exact-flow HHMC conserves energy between resamples") {
  TargetParams p;
  p.dim = 2;
  p.hessian = Matrix{{2.0, 0.3}, {0.3, 1.0}};
  const TargetModel t = builtin_target("gaussian_aniso", p);
  const double m = 1.7;
  const Trajectory tr = simulate_hhmc(t, gaussian_momentum(m, 1.0), 0.4, 50.0, 5);
  CHECK_FALSE(tr.discretized);
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const auto& s = tr.segments[k];
    const auto energy = [&](const PhasePoint& x) { return t.potential(x.q) + x.p.squaredNorm() / (2 * m); };
    const double e0 = energy(s.start);
    for (double frac : {0.3, 0.7, 1.0}) {
      CHECK(energy(tr.state_at(k, frac * s.duration)) == doctest::Approx(e0).epsilon(1e-10));
    }
  }
}

TEST_CASE("Langevin on a flat potential thermalizes momentum to m / beta") {
  TargetModel flat = gaussian(1, 1.0, 0.5);
  flat.potential = [](const Vector&) { return 0.0; };
  flat.gradient = [](const Vector& q) { return Vector::Zero(q.size()).eval(); };
  flat.hessian.reset();
  SimOptions opts;
  opts.initial.kind = InitialCondition::Kind::fixed;
  opts.initial.q0 = Vector::Zero(1);
  const double m = 2.0, beta = 0.5;
  std::vector<double> p2;
  for (int r = 0; r < 50; ++r) {
    const Trajectory tr = simulate_langevin(flat, gaussian_momentum(m, beta), 2.0, 50.0, 0.05, 100 + r, opts);
    CHECK(tr.discretized);
    p2.push_back(time_average(tr, [](const Vector&, const Vector& p) { return p[0] * p[0]; }));
  }
  double mean = 0, var = 0;
  for (double x : p2) mean += x;
  mean /= p2.size();
  for (double x : p2) var += (x - mean) * (x - mean);
  var /= p2.size() - 1;
  CHECK(std::abs(mean - m / beta) <= 3 * std::sqrt(var / p2.size()));
  CHECK_THROWS_AS(simulate_langevin(flat, gaussian_momentum(m, 1.0), 2.0, 1.0, 0.05, 1, opts), DomainError);
}

TEST_CASE("Langevin with small friction is second order in the step") {
  const TargetModel t = gaussian(1, 1.0);
  SimOptions opts;
  opts.initial.kind = InitialCondition::Kind::fixed;
  opts.initial.q0 = Vector::Constant(1, 1.0);
  opts.initial.p0 = Vector::Constant(1, 0.0);
  const auto drift = [&](double h) {
    const Trajectory tr = simulate_langevin(t, gaussian_momentum(1.0, 1.0), 1e-12, 1.0, h, 1, opts);
    const auto& x = tr.final_state;
    return std::abs(0.5 * x.q[0] * x.q[0] + 0.5 * x.p[0] * x.p[0] - 0.5);
  };
  const double ratio = drift(0.1) / drift(0.05);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("time averages") {
  const TargetModel t = gaussian(1, 1.0);
  const Trajectory tr = simulate_bps(t, gaussian_momentum(1.0, 1.0), 1.0, 30.0, 2);
  CHECK(time_average(tr, [](const Vector&, const Vector&) { return 2.5; }) == doctest::Approx(2.5).epsilon(1e-14));
  // q is linear along each segment: exact by the midpoint rule
  double midpoint_sum = 0.0;
  for (std::size_t k = 0; k < tr.segments.size(); ++k) {
    const auto& s = tr.segments[k];
    midpoint_sum += s.duration * (s.start.q[0] + 0.5 * s.duration * s.start.p[0]);
  }
  CHECK(time_average(tr, [](const Vector& q, const Vector&) { return q[0]; }) ==
        doctest::Approx(midpoint_sum / 30.0).epsilon(1e-12));
  const PhaseFunction smooth = [](const Vector& q, const Vector& p) { return std::cos(2 * q[0]) * std::exp(-p[0] * p[0]); };
  const double a5 = time_average(tr, smooth, 5);
  const double a10 = time_average(tr, smooth, 10);
  CHECK(std::abs(a5 - a10) < 1e-8 * std::max(1.0, std::abs(a10)));

  TargetParams hp;
  hp.dim = 1;
  const Trajectory hh = simulate_hhmc(builtin_target("gaussian_iso", hp), gaussian_momentum(1.0, 1.0), 0.5, 30.0, 2);
  CHECK(std::abs(time_average(hh, smooth, 5) - time_average(hh, smooth, 10)) < 1e-8);
}

TEST_CASE("stationary moments of the exact samplers") {
  const TargetModel t = gaussian(1, 2.0);
  for (int which = 0; which < 3; ++which) {
    std::vector<double> q2;
    for (int r = 0; r < 50; ++r) {
      const Trajectory tr = which == 0   ? simulate_bps(t, gaussian_momentum(1.0, 1.0), 1.0, 100.0, derive_seed(6, "replica", r))
                            : which == 1 ? simulate_zigzag(t, 1.0, 100.0, derive_seed(6, "replica", r))
                                         : simulate_hhmc(t, gaussian_momentum(1.0, 1.0), 1.0, 100.0, derive_seed(6, "replica", r));
      q2.push_back(time_average(tr, [](const Vector& q, const Vector&) { return q[0] * q[0]; }));
    }
    double mean = 0, var = 0;
    for (double x : q2) mean += x;
    mean /= q2.size();
    for (double x : q2) var += (x - mean) * (x - mean);
    var /= q2.size() - 1;
    CHECK(std::abs(mean - 0.5) <= 3 * std::sqrt(var / q2.size()));
  }
}
