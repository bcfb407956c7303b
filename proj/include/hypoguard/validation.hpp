#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hypoguard/guarantees.hpp"
#include "hypoguard/hypocoercivity.hpp"
#include "hypoguard/samplers.hpp"
#include "hypoguard/targets.hpp"

namespace hypoguard {

enum class SamplerKind { bps, zigzag, hhmc, langevin };

const char* to_string(SamplerKind kind) noexcept;
SamplerKind sampler_from_string(const std::string& name);

struct SamplerSpec {
  SamplerKind kind = SamplerKind::zigzag;
  double refresh_rate = 1.0;  ///< refresh (BPS, zig-zag) or resample (HHMC) rate
  double gamma = 1.0;         ///< Langevin friction
  double mass = 1.0;
  double step = 0.01;         ///< Langevin step
  SimOptions options;

  /// Exactly simulable: PDMPs, and HHMC with the exact flow.
  bool exact_for(const TargetModel& target) const;
};

enum class Perturbation { linear_tilt, quadratic_tilt };

struct ExperimentConfig {
  SamplerSpec sampler;
  std::string target_name = "gaussian_iso";
  TargetParams target;
  std::string observable_name = "cos";
  ObservableParams observable;
  std::optional<double> lambda_p;  ///< preset from the sampler when empty
  std::optional<double> lambda_q;  ///< preset from the target and momentum law when empty
  std::optional<double> R0;        ///< required; the library never derives it
  std::optional<double> eps;       ///< optimal_eps when empty
  double T = 200.0;
  double delta = 0.1;
  int replicas = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  int r_grid_points = 10;
  int lambda_grid_points = 5;
  Perturbation perturbation = Perturbation::linear_tilt;
  std::vector<double> perturbation_sizes{0.05, 0.1, 0.2, 0.4, 0.8};
};

/// Velocity law of the sampler (Rademacher for zig-zag, Gaussian otherwise).
MomentumModel momentum_for(const SamplerSpec& spec, double beta);

/// lambda_p preset: gamma/m for Langevin (Ornstein-Uhlenbeck gap), the refresh rate otherwise.
double lambda_p_preset(const SamplerSpec& spec);

/// Hypocoercivity constants for a config, filling presets and eps.
HypoParams resolve_hypo(const ExperimentConfig& config, const TargetModel& target);

/// ||d mu / d mu*|| of the configured initial law (1 for a stationary start).
double resolve_dmu_norm(const InitialCondition& initial, const TargetModel& target);

Trajectory run_sampler(const SamplerSpec& spec, const TargetModel& target, double T, std::uint64_t seed);

/// F_T of each replica; replica i uses seed derive_seed(root, "replica", i).
std::vector<double> replica_time_averages(const SamplerSpec& spec, const TargetModel& target,
                                          const Observable& f, double T, int replicas,
                                          std::uint64_t root_seed, int threads);

/// One inequality lhs <= rhs + slack.
struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool vacuous = false;
  bool pass = false;
};

struct ValidationReport {
  std::string experiment;
  std::string status;  ///< pass | fail | vacuous | excluded
  bool pass = false;
  bool certified_sampler = true;
  HypoParams hypo;
  DerivedConstants derived;
  BernsteinPair pair;
  double N = 1.0;
  double dmu_norm = 1.0;
  ObservableStats stats;
  std::vector<double> replica_values;
  double r_minus = 0.0;
  double r_plus = 0.0;
  double coverage = 0.0;
  double coverage_threshold = 0.0;
  std::vector<Check> checks;
  std::vector<std::string> notes;
};

ValidationReport coverage_experiment(const ExperimentConfig& config);
ValidationReport tail_experiment(const ExperimentConfig& config, std::vector<double> r_grid = {});
ValidationReport mgf_experiment(const ExperimentConfig& config, std::vector<double> lambda_grid = {});
ValidationReport uq_experiment(const ExperimentConfig& config);
/// Stationary first and second moments of q and p against closed forms.
ValidationReport moment_experiment(const ExperimentConfig& config);

/// Steady-state relative entropy rate between two 1-D Langevin dynamics that
/// differ in the potential: beta / (4 gamma) E_{nu~}[|V~' - V'|^2].
double girsanov_entropy_rate_langevin(const ScalarFn& grad_V, const ScalarFn& grad_V_tilde, double gamma,
                                      double beta, const Density1D& stationary_tilde);

/// Steady-state relative entropy rate between two 1-D zig-zag processes:
/// E[R~ log(R~/R) - R~ + R] over q ~ nu~ and v uniform on {-1, 1}, with flip
/// rates R = [beta v V']^+ + lambda/2 (refreshes that reverse v are flips too).
/// +infinity when R = 0 where R~ > 0.
double jump_entropy_rate_zigzag(const ScalarFn& grad_V, const ScalarFn& grad_V_tilde, double beta,
                                const Density1D& stationary_tilde, double refresh_rate = 0.0);

}  // namespace hypoguard
