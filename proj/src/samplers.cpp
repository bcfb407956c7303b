#include "hypoguard/samplers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "hypoguard/error.hpp"
#include "hypoguard/quadrature.hpp"

namespace hypoguard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_horizon(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("T must be finite and > 0");
  }
}

// The joint law exp(-beta (V + |p|^2 / 2m)) needs one inverse temperature.
void check_temperature(const TargetModel& target, const MomentumModel& momentum) {
  if (momentum.kind == MomentumModel::Kind::gaussian && momentum.beta != target.beta) {
    throw DomainError("momentum beta differs from target beta");
  }
}

void check_rate(double rate, const char* what) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw DomainError(std::string(what) + " must be finite and >= 0");
  }
}

double exp_clock(double rate, Engine& rng) { return rate > 0.0 ? draw_exp1(rng) / rate : kInf; }

PhasePoint initial_state(const TargetModel& target, const MomentumModel& momentum,
                         const InitialCondition& init, Engine& rng) {
  PhasePoint x;
  switch (init.kind) {
    case InitialCondition::Kind::stationary:
      if (!target.quadratic()) {
        throw DomainError(target.name + ": no exact stationary sampler; use a fixed or gaussian start");
      }
      x.q = target.sample_position(rng);
      break;
    case InitialCondition::Kind::gaussian:
      if (!(init.sd > 0.0)) {
        throw DomainError("gaussian initial condition needs sd > 0");
      }
      x.q.resize(target.dim);
      for (int i = 0; i < target.dim; ++i) {
        x.q[i] = init.mean + init.sd * draw_normal(rng);
      }
      break;
    case InitialCondition::Kind::fixed:
      if (init.q0.size() != target.dim) {
        throw DomainError("fixed initial position has the wrong dimension");
      }
      x.q = init.q0;
      break;
  }
  if (init.kind == InitialCondition::Kind::fixed && init.p0) {
    if (init.p0->size() != target.dim) {
      throw DomainError("fixed initial momentum has the wrong dimension");
    }
    x.p = *init.p0;
  } else {
    x.p = momentum.draw(rng, target.dim);
  }
  x.t = 0.0;
  return x;
}

void push_segment(Trajectory& traj, const Vector& q, const Vector& p, double t, double duration,
                  FlowKind kind) {
  traj.segments.push_back(Segment{PhasePoint{q, p, t}, duration, kind});
}

}  // namespace

const char* to_string(FlowKind kind) noexcept {
  switch (kind) {
    case FlowKind::linear:
      return "linear";
    case FlowKind::hamiltonian_exact:
      return "hamiltonian_exact";
    case FlowKind::leapfrog_step:
      return "leapfrog_step";
    case FlowKind::diffusive_step:
      return "diffusive_step";
  }
  return "unknown";
}

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::bounce:
      return "bounce";
    case EventKind::flip:
      return "flip";
    case EventKind::refresh:
      return "refresh";
    case EventKind::resample:
      return "resample";
  }
  return "unknown";
}

HarmonicFlow::HarmonicFlow(const Matrix& hessian, double mass) : mass_(mass) {
  if (!(mass > 0.0)) {
    throw DomainError("HarmonicFlow: mass must be > 0");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw DomainError("HarmonicFlow: Hessian must be positive definite");
  }
  basis_ = eig.eigenvectors();
  omega_ = (eig.eigenvalues() / mass).cwiseSqrt();
}

PhasePoint HarmonicFlow::advance(const PhasePoint& start, double dt) const {
  const Vector y0 = basis_.transpose() * start.q;
  const Vector pi0 = basis_.transpose() * start.p;
  Vector y(y0.size());
  Vector pi(y0.size());
  for (Eigen::Index k = 0; k < y0.size(); ++k) {
    const double w = omega_[k];
    const double c = std::cos(w * dt);
    const double s = std::sin(w * dt);
    y[k] = y0[k] * c + pi0[k] / (mass_ * w) * s;
    pi[k] = -mass_ * w * y0[k] * s + pi0[k] * c;
  }
  return PhasePoint{basis_ * y, basis_ * pi, start.t + dt};
}

PhasePoint Trajectory::state_at(std::size_t k, double s) const {
  const Segment& seg = segments.at(k);
  switch (seg.kind) {
    case FlowKind::linear:
      return PhasePoint{seg.start.q + (s / mass) * seg.start.p, seg.start.p, seg.start.t + s};
    case FlowKind::hamiltonian_exact:
      if (!flow) {
        throw DomainError("trajectory has hamiltonian_exact segments but no flow");
      }
      return flow->advance(seg.start, s);
    case FlowKind::leapfrog_step:
    case FlowKind::diffusive_step: {
      const PhasePoint& end = segment_end(k);
      const double w = seg.duration > 0.0 ? s / seg.duration : 0.0;
      return PhasePoint{(1.0 - w) * seg.start.q + w * end.q, (1.0 - w) * seg.start.p + w * end.p,
                        seg.start.t + s};
    }
  }
  throw DomainError("unknown segment kind");
}

const PhasePoint& Trajectory::segment_end(std::size_t k) const {
  return k + 1 < segments.size() ? segments[k + 1].start : final_state;
}

std::size_t Trajectory::count(EventKind kind) const {
  std::size_t n = 0;
  for (const auto& e : events) {
    n += (e.kind == kind) ? 1 : 0;
  }
  return n;
}

Vector reflect_with_coefficient(const Vector& p, const Vector& grad, double coefficient) {
  const double g2 = grad.squaredNorm();
  if (!(g2 > 0.0)) {
    throw DomainError("reflect: gradient is zero, no collision plane");
  }
  return p - (coefficient * p.dot(grad) / g2) * grad;
}

Vector reflect(const Vector& p, const Vector& grad) { return reflect_with_coefficient(p, grad, 2.0); }

Vector flip(const Vector& p, int i) {
  if (i < 0 || i >= p.size()) {
    throw DomainError("flip: component index out of range");
  }
  Vector out = p;
  out[i] = -out[i];
  return out;
}

double first_event_time_affine(double a, double b, double exp_draw) {
  const double E = exp_draw;
  if (!(E >= 0.0)) {
    throw DomainError("first_event_time_affine: exponential draw must be >= 0");
  }
  if (b == 0.0) {
    return a > 0.0 ? E / a : kInf;
  }
  if (b > 0.0) {
    if (a >= 0.0) {
      // a tau + b tau^2 / 2 = E, rationalized to avoid cancellation.
      return 2.0 * E / (a + std::sqrt(a * a + 2.0 * b * E));
    }
    // zero rate until s = -a/b, then b (s + a/b).
    return -a / b + std::sqrt(2.0 * E / b);
  }
  // b < 0: the rate decays to zero at s = a / |b| with total mass a^2 / (2|b|).
  if (a <= 0.0 || E >= a * a / (-2.0 * b)) {
    return kInf;
  }
  return 2.0 * E / (a + std::sqrt(a * a + 2.0 * b * E));
}

double first_event_time_thinned(const std::function<double(double)>& rate,
                                const std::function<LocalBound(double, double)>& bound,
                                double window, double horizon, Engine& rng) {
  if (!(window > 0.0)) {
    throw DomainError("thinning window must be > 0");
  }
  double s0 = 0.0;
  while (s0 < horizon) {
    const LocalBound env = bound(s0, window);
    if (!(env.intercept >= 0.0) || !(env.slope >= 0.0)) {
      throw BoundViolationError("thinning envelope must be nonnegative");
    }
    const double u = first_event_time_affine(env.intercept, env.slope, draw_exp1(rng));
    if (u > window) {
      s0 += window;
      continue;
    }
    const double s = s0 + u;
    if (s >= horizon) {
      return kInf;
    }
    const double envelope = env.intercept + env.slope * u;
    const double actual = rate(s);
    if (actual > envelope * (1.0 + 1e-12) + 1e-300) {
      std::ostringstream msg;
      msg << "thinning bound violated at s = " << s << ": rate " << actual << " > envelope " << envelope;
      throw BoundViolationError(msg.str());
    }
    if (draw_uniform(rng) * envelope <= actual) {
      return s;
    }
    s0 = s;
  }
  return kInf;
}

Trajectory simulate_bps(const TargetModel& target, const MomentumModel& momentum, double refresh_rate,
                        double T, std::uint64_t seed, const SimOptions& options) {
  check_horizon(T);
  check_temperature(target, momentum);
  check_rate(refresh_rate, "refresh rate");
  const RngStreams streams(seed);
  Engine init_rng = streams.stream("initial");
  Engine bounce_rng = streams.stream("bounce");
  Engine refresh_rng = streams.stream("refresh");

  Trajectory traj;
  traj.sampler = "bps";
  traj.seed = seed;
  traj.horizon = T;
  traj.mass = momentum.mass;
  PhasePoint x = initial_state(target, momentum, options.initial, init_rng);
  const double beta = target.beta;
  const double m = momentum.mass;

  double t = 0.0;
  while (t < T) {
    const Vector v = x.p / m;
    const double remaining = T - t;
    const double tau_refresh = exp_clock(refresh_rate, refresh_rng);
    double tau_bounce = kInf;
    if (target.quadratic()) {
      const Matrix& H = *target.hessian;
      const Vector Hv = H * v;
      tau_bounce = first_event_time_affine(beta * Hv.dot(x.q), beta * Hv.dot(v), draw_exp1(bounce_rng));
    } else {
      const Vector q0 = x.q;
      auto rate = [&](double s) { return std::max(0.0, beta * v.dot(target.gradient(q0 + s * v))); };
      auto envelope = [&](double s0, double w) {
        return LocalBound{rate(s0), beta * target.hessian_norm_bound(q0 + s0 * v, v, w) * v.squaredNorm()};
      };
      tau_bounce = first_event_time_thinned(rate, envelope, options.thinning_window,
                                            std::min(remaining, tau_refresh), bounce_rng);
    }
    const double tau = std::min({tau_bounce, tau_refresh, remaining});
    push_segment(traj, x.q, x.p, t, tau, FlowKind::linear);
    x.q += tau * v;
    t += tau;
    if (tau >= remaining) {
      break;
    }
    EventRecord ev;
    ev.time = t;
    ev.pre_velocity = x.p;
    if (tau_bounce <= tau_refresh) {
      ev.kind = EventKind::bounce;
      const Vector grad = target.gradient(x.q);
      if (grad.squaredNorm() > 0.0) {
        x.p = reflect_with_coefficient(x.p, grad, options.reflection_coefficient);
      } else {
        ev.kind = EventKind::refresh;
        x.p = momentum.draw(refresh_rng, target.dim);
      }
    } else {
      ev.kind = EventKind::refresh;
      x.p = momentum.draw(refresh_rng, target.dim);
    }
    ev.post_velocity = x.p;
    traj.events.push_back(std::move(ev));
  }
  traj.final_state = PhasePoint{x.q, x.p, T};
  return traj;
}

Trajectory simulate_zigzag(const TargetModel& target, double refresh_rate, double T, std::uint64_t seed,
                           const SimOptions& options) {
  check_horizon(T);
  check_rate(refresh_rate, "refresh rate");
  const RngStreams streams(seed);
  Engine init_rng = streams.stream("initial");
  Engine bounce_rng = streams.stream("bounce");
  Engine refresh_rng = streams.stream("refresh");
  const MomentumModel velocity_law = rademacher_momentum();

  Trajectory traj;
  traj.sampler = "zigzag";
  traj.seed = seed;
  traj.horizon = T;
  traj.mass = 1.0;
  PhasePoint x = initial_state(target, velocity_law, options.initial, init_rng);
  for (Eigen::Index i = 0; i < x.p.size(); ++i) {
    if (x.p[i] != 1.0 && x.p[i] != -1.0) {
      throw DomainError("zig-zag velocities must have entries in {-1, +1}");
    }
  }
  const double beta = target.beta;
  const int d = target.dim;

  double t = 0.0;
  while (t < T) {
    const Vector& v = x.p;
    const double remaining = T - t;
    const double tau_refresh = exp_clock(refresh_rate, refresh_rng);
    double tau_flip = kInf;
    int component = -1;
    if (target.quadratic()) {
      const Matrix& H = *target.hessian;
      const Vector Hq = H * x.q;
      const Vector Hv = H * v;
      for (int i = 0; i < d; ++i) {
        const double tau_i = first_event_time_affine(beta * v[i] * Hq[i], beta * v[i] * Hv[i],
                                                     draw_exp1(bounce_rng));
        if (tau_i < tau_flip) {
          tau_flip = tau_i;
          component = i;
        }
      }
    } else {
      const Vector q0 = x.q;
      auto rates = [&](double s) {
        const Vector g = target.gradient(q0 + s * v);
        Vector r(d);
        for (int i = 0; i < d; ++i) {
          r[i] = std::max(0.0, beta * v[i] * g[i]);
        }
        return r;
      };
      auto total = [&](double s) { return rates(s).sum(); };
      // |d/ds v_i d_i V| <= ||Hess|| |v| |v_i|, summed over i.
      const double speed_factor = v.norm() * v.cwiseAbs().sum();
      auto envelope = [&](double s0, double w) {
        return LocalBound{total(s0), beta * target.hessian_norm_bound(q0 + s0 * v, v, w) * speed_factor};
      };
      tau_flip = first_event_time_thinned(total, envelope, options.thinning_window,
                                          std::min(remaining, tau_refresh), bounce_rng);
      if (std::isfinite(tau_flip)) {
        const Vector r = rates(tau_flip);
        double u = draw_uniform(bounce_rng) * r.sum();
        component = d - 1;
        for (int i = 0; i < d; ++i) {
          if (u < r[i]) {
            component = i;
            break;
          }
          u -= r[i];
        }
      }
    }
    const double tau = std::min({tau_flip, tau_refresh, remaining});
    push_segment(traj, x.q, x.p, t, tau, FlowKind::linear);
    x.q += tau * v;
    t += tau;
    if (tau >= remaining) {
      break;
    }
    EventRecord ev;
    ev.time = t;
    ev.pre_velocity = x.p;
    if (tau_flip <= tau_refresh) {
      ev.kind = EventKind::flip;
      ev.component = component;
      x.p = flip(x.p, component);
    } else {
      ev.kind = EventKind::refresh;
      x.p = velocity_law.draw(refresh_rng, d);
    }
    ev.post_velocity = x.p;
    traj.events.push_back(std::move(ev));
  }
  traj.final_state = PhasePoint{x.q, x.p, T};
  return traj;
}

Trajectory simulate_hhmc(const TargetModel& target, const MomentumModel& momentum, double resample_rate,
                         double T, std::uint64_t seed, const SimOptions& options) {
  check_horizon(T);
  check_temperature(target, momentum);
  if (!(resample_rate > 0.0) || !std::isfinite(resample_rate)) {
    throw DomainError("HHMC resample rate must be finite and > 0");
  }
  if (momentum.kind != MomentumModel::Kind::gaussian) {
    throw DomainError("HHMC needs a Gaussian momentum law");
  }
  bool exact = target.quadratic();
  if (options.hhmc_integrator == HhmcIntegrator::exact && !exact) {
    throw DomainError("exact HHMC flow needs a quadratic target");
  }
  if (options.hhmc_integrator == HhmcIntegrator::leapfrog) {
    exact = false;
  }
  if (!exact && !(options.leapfrog_step > 0.0)) {
    throw DomainError("leapfrog step must be > 0");
  }
  const RngStreams streams(seed);
  Engine init_rng = streams.stream("initial");
  Engine refresh_rng = streams.stream("refresh");

  Trajectory traj;
  traj.sampler = "hhmc";
  traj.seed = seed;
  traj.horizon = T;
  traj.mass = momentum.mass;
  traj.discretized = !exact;
  if (!exact) {
    traj.note = "leapfrog discretization: O(h^2) bias not covered by exact-process guarantees";
  }
  std::shared_ptr<const HarmonicFlow> flow;
  if (exact) {
    flow = std::make_shared<HarmonicFlow>(*target.hessian, momentum.mass);
    traj.flow = flow;
  }
  PhasePoint x = initial_state(target, momentum, options.initial, init_rng);
  const double m = momentum.mass;
  const double h = options.leapfrog_step;

  double t = 0.0;
  while (t < T) {
    const double remaining = T - t;
    const double tau_resample = exp_clock(resample_rate, refresh_rng);
    const double tau = std::min(tau_resample, remaining);
    if (exact) {
      push_segment(traj, x.q, x.p, t, tau, FlowKind::hamiltonian_exact);
      x = flow->advance(PhasePoint{x.q, x.p, t}, tau);
    } else {
      double elapsed = 0.0;
      while (elapsed < tau) {
        const double dt = std::min(h, tau - elapsed);
        push_segment(traj, x.q, x.p, t + elapsed, dt, FlowKind::leapfrog_step);
        x.p -= 0.5 * dt * target.gradient(x.q);
        x.q += (dt / m) * x.p;
        x.p -= 0.5 * dt * target.gradient(x.q);
        elapsed += dt;
      }
    }
    t += tau;
    if (tau >= remaining) {
      break;
    }
    EventRecord ev;
    ev.time = t;
    ev.kind = EventKind::resample;
    ev.pre_velocity = x.p;
    x.p = momentum.draw(refresh_rng, target.dim);
    ev.post_velocity = x.p;
    traj.events.push_back(std::move(ev));
  }
  traj.final_state = PhasePoint{x.q, x.p, T};
  return traj;
}

Trajectory simulate_langevin(const TargetModel& target, const MomentumModel& momentum, double gamma,
                             double T, double step, std::uint64_t seed, const SimOptions& options) {
  check_horizon(T);
  check_temperature(target, momentum);
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError("Langevin friction gamma must be finite and > 0");
  }
  if (!(step > 0.0)) {
    throw DomainError("Langevin step must be > 0");
  }
  if (momentum.kind != MomentumModel::Kind::gaussian) {
    throw DomainError("Langevin needs a Gaussian momentum law");
  }
  const RngStreams streams(seed);
  Engine init_rng = streams.stream("initial");
  Engine noise_rng = streams.stream("noise");

  Trajectory traj;
  traj.sampler = "langevin";
  traj.seed = seed;
  traj.horizon = T;
  traj.mass = momentum.mass;
  traj.discretized = true;
  traj.note = "discretized: bias O(h^2) not covered by exact-process guarantees";

  PhasePoint x = initial_state(target, momentum, options.initial, init_rng);
  const double m = momentum.mass;
  const auto n_steps = static_cast<long long>(std::ceil(T / step - 1e-12));
  const double h = T / static_cast<double>(n_steps);
  // Exact OU update for dp = -(gamma/m) p dt + sqrt(2 gamma / beta) dW.
  const double decay = std::exp(-gamma * h / m);
  const double kick_sd = std::sqrt(-std::expm1(-2.0 * gamma * h / m) * m / target.beta);
  traj.segments.reserve(static_cast<std::size_t>(n_steps));
  for (long long k = 0; k < n_steps; ++k) {
    const double t = k * h;
    push_segment(traj, x.q, x.p, t, h, FlowKind::diffusive_step);
    x.p -= 0.5 * h * target.gradient(x.q);
    x.q += (0.5 * h / m) * x.p;
    for (Eigen::Index i = 0; i < x.p.size(); ++i) {
      x.p[i] = decay * x.p[i] + kick_sd * draw_normal(noise_rng);
    }
    x.q += (0.5 * h / m) * x.p;
    x.p -= 0.5 * h * target.gradient(x.q);
  }
  traj.final_state = PhasePoint{x.q, x.p, T};
  return traj;
}

double time_average(const Trajectory& traj, const PhaseFunction& f, int order, double max_panel) {
  if (!(traj.horizon > 0.0)) {
    throw DomainError("time_average: trajectory horizon must be > 0");
  }
  if (!(max_panel > 0.0)) {
    throw DomainError("time_average: max_panel must be > 0");
  }
  double integral = 0.0;
  for (std::size_t k = 0; k < traj.segments.size(); ++k) {
    const Segment& seg = traj.segments[k];
    if (seg.duration <= 0.0) {
      continue;
    }
    switch (seg.kind) {
      case FlowKind::linear:
      case FlowKind::hamiltonian_exact: {
        const int panels = std::max(1, static_cast<int>(std::ceil(seg.duration / max_panel)));
        integral += gauss_legendre(
            [&](double s) {
              const PhasePoint x = traj.state_at(k, s);
              return f(x.q, x.p);
            },
            0.0, seg.duration, panels, order);
        break;
      }
      case FlowKind::leapfrog_step:
      case FlowKind::diffusive_step: {
        const PhasePoint& end = traj.segment_end(k);
        integral += 0.5 * seg.duration * (f(seg.start.q, seg.start.p) + f(end.q, end.p));
        break;
      }
    }
  }
  return integral / traj.horizon;
}

double time_average(const Trajectory& traj, const Observable& f, int order, double max_panel) {
  return time_average(
      traj, [&f](const Vector& q, const Vector&) { return f(q); }, order, max_panel);
}

}  // namespace hypoguard
