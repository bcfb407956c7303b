#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hypoguard/rng.hpp"
#include "hypoguard/targets.hpp"

namespace hypoguard {

enum class FlowKind { linear, hamiltonian_exact, leapfrog_step, diffusive_step };
enum class EventKind { bounce, flip, refresh, resample };

const char* to_string(FlowKind kind) noexcept;
const char* to_string(EventKind kind) noexcept;

struct PhasePoint {
  Vector q;
  Vector p;  ///< momentum; the velocity is p / m (zig-zag: m = 1, entries +-1)
  double t = 0.0;
};

struct Segment {
  PhasePoint start;
  double duration = 0.0;
  FlowKind kind = FlowKind::linear;
};

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::refresh;
  int component = -1;  ///< flipped component for zig-zag flips
  Vector pre_velocity;
  Vector post_velocity;
};

/// Exact Hamiltonian flow for V(q) = q^T H q / 2 with kinetic energy |p|^2 / 2m.
class HarmonicFlow {
 public:
  HarmonicFlow(const Matrix& hessian, double mass);

  PhasePoint advance(const PhasePoint& start, double dt) const;

 private:
  Matrix basis_;
  Vector omega_;
  double mass_;
};

/// Piecewise-deterministic (or step-discretized) path on [0, horizon].
/// Segments tile [0, horizon] in order; segment k ends where segment k+1 starts.
struct Trajectory {
  std::string sampler;
  std::uint64_t seed = 0;
  double horizon = 0.0;
  double mass = 1.0;
  bool discretized = false;
  std::string note;
  std::vector<Segment> segments;
  std::vector<EventRecord> events;
  PhasePoint final_state;
  std::shared_ptr<const HarmonicFlow> flow;  ///< set for hamiltonian_exact segments

  /// State s time units into segment k (s in [0, duration]); exact for
  /// linear and hamiltonian_exact segments, linear interpolation otherwise.
  PhasePoint state_at(std::size_t k, double s) const;
  /// State at the end of segment k.
  const PhasePoint& segment_end(std::size_t k) const;
  std::size_t count(EventKind kind) const;
};

struct InitialCondition {
  enum class Kind { stationary, gaussian, fixed };

  Kind kind = Kind::stationary;
  double mean = 0.0;  ///< gaussian: per-component position mean
  double sd = 1.0;    ///< gaussian: per-component position standard deviation
  Vector q0;          ///< fixed: starting position
  std::optional<Vector> p0;  ///< fixed start momentum; otherwise drawn from rho*
};

enum class HhmcIntegrator { automatic, exact, leapfrog };

struct SimOptions {
  InitialCondition initial;
  double thinning_window = 0.5;
  /// Reflection p - k (p.g / |g|^2) g. k = 2 is the elastic collision; other
  /// values exist only to demonstrate that validation catches broken dynamics.
  double reflection_coefficient = 2.0;
  HhmcIntegrator hhmc_integrator = HhmcIntegrator::automatic;
  double leapfrog_step = 0.01;
};

/// Elastic reflection of p off the hyperplane orthogonal to grad.
Vector reflect(const Vector& p, const Vector& grad);
Vector reflect_with_coefficient(const Vector& p, const Vector& grad, double coefficient);

/// p with component i negated.
Vector flip(const Vector& p, int i);

/// First arrival of a Poisson process with rate (a + b s)^+, given E ~ Exp(1):
/// solves int_0^tau (a + b s)^+ ds = E in closed form. +infinity if never.
double first_event_time_affine(double a, double b, double exp_draw);

/// rate(s0 + u) <= intercept + slope u for u in [0, window].
struct LocalBound {
  double intercept = 0.0;
  double slope = 0.0;
};

/// First arrival of a Poisson process with rate `rate(s)` by thinning against
/// affine envelopes supplied by `bound(s0, window)`. Returns +infinity if no
/// arrival occurs before `horizon`. Throws BoundViolationError if the rate ever
/// exceeds its envelope.
double first_event_time_thinned(const std::function<double(double)>& rate,
                                const std::function<LocalBound(double, double)>& bound,
                                double window, double horizon, Engine& rng);

Trajectory simulate_bps(const TargetModel& target, const MomentumModel& momentum, double refresh_rate,
                        double T, std::uint64_t seed, const SimOptions& options = {});

Trajectory simulate_zigzag(const TargetModel& target, double refresh_rate, double T, std::uint64_t seed,
                           const SimOptions& options = {});

Trajectory simulate_hhmc(const TargetModel& target, const MomentumModel& momentum, double resample_rate,
                         double T, std::uint64_t seed, const SimOptions& options = {});

/// Splitting scheme B A O A B with an exact Ornstein-Uhlenbeck O step.
/// Discretized: its O(h^2) bias is outside the exact-process guarantees.
Trajectory simulate_langevin(const TargetModel& target, const MomentumModel& momentum, double gamma,
                             double T, double step, std::uint64_t seed, const SimOptions& options = {});

using PhaseFunction = std::function<double(const Vector& q, const Vector& p)>;

/// (1/T) int_0^T f(X_t) dt. Exact-flow segments use composite Gauss-Legendre
/// of the given order on panels no longer than max_panel; step segments use
/// the trapezoid rule.
double time_average(const Trajectory& traj, const PhaseFunction& f, int order = 5,
                    double max_panel = 0.5);
double time_average(const Trajectory& traj, const Observable& f, int order = 5, double max_panel = 0.5);

}  // namespace hypoguard
