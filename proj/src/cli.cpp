#include "hypoguard/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "hypoguard/error.hpp"

namespace hypoguard::cli {

namespace {

// ---- flat config access ---------------------------------------------------

bool present(const Json& flat, const std::string& key) { return flat.contains(key) && !flat.at(key).is_null(); }

double get_number(const Json& flat, const std::string& key) {
  const Json& v = flat.at(key);
  if (!v.is_number()) {
    throw ConfigError(key, "expected a number, got " + v.dump());
  }
  return v.get<double>();
}

std::optional<double> get_optional_number(const Json& flat, const std::string& key) {
  if (!present(flat, key)) {
    return std::nullopt;
  }
  return get_number(flat, key);
}

long long get_integer(const Json& flat, const std::string& key) {
  const Json& v = flat.at(key);
  if (v.is_number_integer()) {
    return v.get<long long>();
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9e15) {
      return static_cast<long long>(x);
    }
  }
  throw ConfigError(key, "expected an integer, got " + v.dump());
}

int get_positive_int(const Json& flat, const std::string& key) {
  const long long x = get_integer(flat, key);
  if (x < 1 || x > 100000000) {
    throw ConfigError(key, "must be a positive integer");
  }
  return static_cast<int>(x);
}

std::string get_string(const Json& flat, const std::string& key) {
  const Json& v = flat.at(key);
  if (!v.is_string()) {
    throw ConfigError(key, "expected a string, got " + v.dump());
  }
  return v.get<std::string>();
}

std::vector<double> get_number_array(const Json& flat, const std::string& key) {
  const Json& v = flat.at(key);
  if (!v.is_array()) {
    throw ConfigError(key, "expected an array of numbers");
  }
  std::vector<double> xs;
  for (const auto& item : v) {
    if (!item.is_number()) {
      throw ConfigError(key, "expected an array of numbers");
    }
    xs.push_back(item.get<double>());
  }
  return xs;
}

std::uint64_t parse_seed(const std::string& text, const std::string& field) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(field, "expected an unsigned 64-bit integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError(field, "out of range: '" + text + "'");
  }
}

std::uint64_t get_seed(const Json& flat) {
  const Json& v = flat.at("seed");
  if (v.is_number_unsigned()) {
    return v.get<std::uint64_t>();
  }
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(v.get<long long>());
  }
  if (v.is_string()) {
    return parse_seed(v.get<std::string>(), "seed");
  }
  throw ConfigError("seed", "expected an unsigned 64-bit integer, got " + v.dump());
}

Vector to_vector(const std::vector<double>& xs) {
  return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) {
    throw ConfigError(key, message);
  }
}

// ---- pieces shared by several commands -------------------------------------

TargetModel target_from(const ExperimentConfig& config) { return builtin_target(config.target_name, config.target); }

// Observable statistics: explicit overrides when variance/sup_norm are given,
// otherwise computed from the target and observable.
ObservableStats stats_from(const Json& flat, const ExperimentConfig& config, const TargetModel* target) {
  if (present(flat, "variance") || present(flat, "sup_norm")) {
    require(present(flat, "variance"), "variance", "required together with sup_norm");
    require(present(flat, "sup_norm"), "sup_norm", "required together with variance");
    ObservableStats s{present(flat, "mean") ? get_number(flat, "mean") : 0.0, get_number(flat, "variance"),
                      get_number(flat, "sup_norm")};
    s.validate();
    return s;
  }
  return builtin_observable(config.observable_name, config.observable, *target).stats;
}

struct Constants {
  HypoParams hypo;
  bool eps_auto = false;
  double eps_max = 1.0;
  ObservableStats stats;
  double dmu_norm = 1.0;
  HypoBernstein bern;
};

Constants constants_from(const Json& flat, const ExperimentConfig& config) {
  Constants k;
  if (!config.R0) {
    throw ConfigError("R0", "required: the off-diagonal coupling bound is a model input");
  }
  // A target is only needed for presets and computed statistics.
  const bool need_target = !config.lambda_q || !(present(flat, "variance") || present(flat, "sup_norm")) ||
                           (!present(flat, "dmu_norm") &&
                            config.sampler.options.initial.kind != InitialCondition::Kind::stationary);
  std::optional<TargetModel> target;
  if (need_target) {
    target = target_from(config);
  }
  if (target) {
    k.hypo = resolve_hypo(config, *target);
  } else {
    k.hypo.lambda_p = config.lambda_p.value_or(lambda_p_preset(config.sampler));
    if (!config.lambda_p && !(k.hypo.lambda_p > 0.0)) {
      throw ConfigError("lambda_p", "preset from the refresh rate is 0; set refresh_rate > 0 or lambda_p");
    }
    k.hypo.lambda_q = *config.lambda_q;
    k.hypo.R0 = *config.R0;
    k.hypo.eps = config.eps ? *config.eps : optimal_eps(k.hypo.lambda_q, k.hypo.lambda_p, k.hypo.R0);
    k.hypo.validate();
  }
  k.eps_auto = !config.eps;
  k.eps_max = eps_max(k.hypo.lambda_q, k.hypo.lambda_p, k.hypo.R0);
  k.stats = stats_from(flat, config, target ? &*target : nullptr);
  k.dmu_norm = present(flat, "dmu_norm") ? get_number(flat, "dmu_norm")
                                         : resolve_dmu_norm(config.sampler.options.initial, *target);
  require(k.dmu_norm >= 1.0, "dmu_norm", "an L^2 density-ratio norm is at least 1");
  k.bern = bernstein_from_hypo(k.hypo, k.stats, k.dmu_norm);
  return k;
}

Json constants_json(const Constants& k) {
  Json j{{"hypo", to_json(k.hypo)},
         {"eps_auto", k.eps_auto},
         {"eps_max", k.eps_max},
         {"derived", to_json(k.bern.derived)},
         {"stats", to_json(k.stats)},
         {"dmu_norm", k.dmu_norm},
         {"pair", to_json(k.bern.pair)},
         {"N", k.bern.N}};
  return j;
}

// Flattens nested objects into dotted keys for the csv format.
void flatten(const Json& v, const std::string& prefix, std::vector<std::pair<std::string, Json>>& rows) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
    }
  } else if (v.is_array() && !v.empty() && (v.front().is_object() || v.front().is_array())) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      flatten(v[i], prefix + "." + std::to_string(i), rows);
    }
  } else {
    rows.emplace_back(prefix, v);
  }
}

std::string csv_cell(const Json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : dump_json(v, -1);
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (const char ch : s) {
      quoted += ch;
      if (ch == '"') quoted += '"';
    }
    return quoted + "\"";
  }
  return s;
}

std::string key_value_csv(const Json& result) {
  std::vector<std::pair<std::string, Json>> rows;
  flatten(result, "", rows);
  std::string out = "key,value\n";
  for (const auto& [key, value] : rows) {
    out += csv_cell(key) + "," + csv_cell(value) + "\n";
  }
  return out;
}

std::string trajectory_csv(const Trajectory& traj) {
  const auto dim = traj.final_state.q.size();
  std::string out = "t";
  for (Eigen::Index i = 0; i < dim; ++i) out += ",q" + std::to_string(i);
  for (Eigen::Index i = 0; i < dim; ++i) out += ",p" + std::to_string(i);
  out += ",event\n";
  auto row = [&](const PhasePoint& x, const std::string& label) {
    out += dump_json(Json(x.t), -1);
    for (Eigen::Index i = 0; i < dim; ++i) out += "," + dump_json(Json(x.q[i]), -1);
    for (Eigen::Index i = 0; i < dim; ++i) out += "," + dump_json(Json(x.p[i]), -1);
    out += "," + label + "\n";
  };
  std::size_t next_event = 0;
  for (std::size_t k = 0; k < traj.segments.size(); ++k) {
    const PhasePoint& start = traj.segments[k].start;
    std::string label = k == 0 ? "start" : "none";
    while (next_event < traj.events.size() && traj.events[next_event].time < start.t - 1e-12) {
      ++next_event;
    }
    if (k > 0 && next_event < traj.events.size() &&
        std::abs(traj.events[next_event].time - start.t) <= 1e-12 * std::max(1.0, start.t)) {
      label = to_string(traj.events[next_event].kind);
      ++next_event;
    }
    row(start, label);
  }
  row(traj.final_state, "end");
  return out;
}

Json sample_json(const Trajectory& traj, const Observable& obs) {
  Json events{{"bounce", traj.count(EventKind::bounce)},
              {"flip", traj.count(EventKind::flip)},
              {"refresh", traj.count(EventKind::refresh)},
              {"resample", traj.count(EventKind::resample)}};
  Json mean_q = Json::array(), mean_q2 = Json::array(), mean_p = Json::array(), mean_p2 = Json::array();
  for (Eigen::Index i = 0; i < traj.final_state.q.size(); ++i) {
    mean_q.push_back(time_average(traj, [i](const Vector& q, const Vector&) { return q[i]; }));
    mean_q2.push_back(time_average(traj, [i](const Vector& q, const Vector&) { return q[i] * q[i]; }));
    mean_p.push_back(time_average(traj, [i](const Vector&, const Vector& p) { return p[i]; }));
    mean_p2.push_back(time_average(traj, [i](const Vector&, const Vector& p) { return p[i] * p[i]; }));
  }
  return Json{{"sampler", traj.sampler},
              {"horizon", traj.horizon},
              {"discretized", traj.discretized},
              {"note", traj.note},
              {"segments", traj.segments.size()},
              {"events", events},
              {"final_state", Json{{"t", traj.final_state.t},
                                   {"q", to_json(traj.final_state.q)},
                                   {"p", to_json(traj.final_state.p)}}},
              {"observable", obs.name},
              {"observable_mean", obs.stats.mean},
              {"time_average", time_average(traj, obs)},
              {"time_average_q", mean_q},
              {"time_average_q2", mean_q2},
              {"time_average_p", mean_p},
              {"time_average_p2", mean_p2}};
}

// ---- command-line parsing ---------------------------------------------------

struct Flags {
  std::string config_path;
  std::optional<std::string> seed;
  std::string out_path;
  std::string format = "json";
  std::optional<int> threads;
  std::vector<std::string> sets;
  std::optional<std::string> sampler, eps, R0, T, delta, replicas, reflection_coefficient;
};

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error&) {
    return Json(text);
  }
}

Json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config", "cannot open '" + path + "'");
  }
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", "'" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config", "top level of '" + path + "' must be an object");
  }
  return j;
}

// defaults < config file < HYPOGUARD_SEED < command-line flags
Json resolve_flat(const Flags& flags, const Json& command_defaults) {
  Json flat = default_flat_config();
  for (auto it = command_defaults.begin(); it != command_defaults.end(); ++it) {
    flat[it.key()] = it.value();
  }
  auto assign = [&](const std::string& key, const Json& value) {
    if (!flat.contains(key)) {
      throw ConfigError(key, "unknown configuration key");
    }
    flat[key] = value;
  };
  if (!flags.config_path.empty()) {
    const Json file = load_file(flags.config_path);
    for (auto it = file.begin(); it != file.end(); ++it) {
      assign(it.key(), it.value());
    }
  }
  if (const char* env = std::getenv("HYPOGUARD_SEED"); env != nullptr && *env != '\0') {
    assign("seed", parse_seed(env, "HYPOGUARD_SEED"));
  }
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("set", "expected KEY=VALUE, got '" + kv + "'");
    }
    assign(kv.substr(0, eq), parse_value(kv.substr(eq + 1)));
  }
  const std::pair<const char*, const std::optional<std::string>*> named[] = {
      {"sampler", &flags.sampler}, {"eps", &flags.eps},           {"R0", &flags.R0},
      {"T", &flags.T},             {"delta", &flags.delta},       {"replicas", &flags.replicas},
      {"reflection_coefficient", &flags.reflection_coefficient}};
  for (const auto& [key, value] : named) {
    if (*value) {
      assign(key, parse_value(**value));
    }
  }
  if (flags.seed) {
    assign("seed", parse_seed(*flags.seed, "seed"));
  }
  if (flags.threads) {
    assign("threads", *flags.threads);
  }
  return flat;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) {
    throw ConfigError("out", "cannot write '" + out_path + "'");
  }
  file << text;
}

Json envelope(const std::string& command, const Json& flat, const Json& result) {
  return Json{{"schema_version", kSchemaVersion},
              {"command", command},
              {"seed", get_seed(flat)},
              {"config", flat},
              {"result", result}};
}

}  // namespace

Json default_flat_config() {
  return Json{{"sampler", "zigzag"},
              {"refresh_rate", nullptr},
              {"gamma", 1.0},
              {"mass", 1.0},
              {"step", 0.01},
              {"thinning_window", 0.5},
              {"reflection_coefficient", 2.0},
              {"hhmc_integrator", "auto"},
              {"leapfrog_step", 0.01},
              {"target", "gaussian_iso"},
              {"dim", 1},
              {"h", 1.0},
              {"h_diag", nullptr},
              {"hessian", nullptr},
              {"beta", 1.0},
              {"poincare_const", nullptr},
              {"observable", "cos"},
              {"omega", 1.0},
              {"a", -1.0},
              {"b", 1.0},
              {"clip", 1.0},
              {"coordinate", 0},
              {"lambda_p", nullptr},
              {"lambda_q", nullptr},
              {"R0", nullptr},
              {"eps", "auto"},
              {"mean", nullptr},
              {"variance", nullptr},
              {"sup_norm", nullptr},
              {"dmu_norm", nullptr},
              {"initial", "stationary"},
              {"initial_mean", 0.0},
              {"initial_sd", 1.0},
              {"q0", nullptr},
              {"p0", nullptr},
              {"T", 200.0},
              {"delta", 0.1},
              {"replicas", 200},
              {"seed", 0},
              {"threads", 1},
              {"r_grid", nullptr},
              {"r_grid_points", 10},
              {"lambda_grid", nullptr},
              {"lambda_grid_points", 5},
              {"perturbation", "linear_tilt"},
              {"perturbation_sizes", Json::array({0.05, 0.1, 0.2, 0.4, 0.8})},
              {"target_radius", nullptr},
              {"lab_dim", 5},
              {"lab_trials", 200},
              {"lab_grid", 50},
              {"eig_trials", 10000}};
}

ExperimentConfig experiment_from_flat(const Json& flat) {
  const Json defaults = default_flat_config();
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    if (!defaults.contains(it.key())) {
      throw ConfigError(it.key(), "unknown configuration key");
    }
  }
  Json f = defaults;
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    f[it.key()] = it.value();
  }

  ExperimentConfig c;
  SamplerSpec& s = c.sampler;
  s.kind = sampler_from_string(get_string(f, "sampler"));
  // zig-zag runs without refreshment unless asked; the other samplers need it
  s.refresh_rate = present(f, "refresh_rate") ? get_number(f, "refresh_rate")
                                              : (s.kind == SamplerKind::zigzag ? 0.0 : 1.0);
  s.gamma = get_number(f, "gamma");
  s.mass = get_number(f, "mass");
  s.step = get_number(f, "step");
  require(s.refresh_rate >= 0.0, "refresh_rate", "must be >= 0");
  require(s.gamma > 0.0, "gamma", "must be > 0");
  require(s.mass > 0.0, "mass", "must be > 0");
  require(s.step > 0.0, "step", "must be > 0");
  s.options.thinning_window = get_number(f, "thinning_window");
  require(s.options.thinning_window > 0.0, "thinning_window", "must be > 0");
  s.options.reflection_coefficient = get_number(f, "reflection_coefficient");
  const std::string integrator = get_string(f, "hhmc_integrator");
  if (integrator == "auto") {
    s.options.hhmc_integrator = HhmcIntegrator::automatic;
  } else if (integrator == "exact") {
    s.options.hhmc_integrator = HhmcIntegrator::exact;
  } else if (integrator == "leapfrog") {
    s.options.hhmc_integrator = HhmcIntegrator::leapfrog;
  } else {
    throw ConfigError("hhmc_integrator", "expected auto, exact or leapfrog");
  }
  s.options.leapfrog_step = get_number(f, "leapfrog_step");
  require(s.options.leapfrog_step > 0.0, "leapfrog_step", "must be > 0");

  c.target_name = get_string(f, "target");
  require(c.target_name == "gaussian_iso" || c.target_name == "gaussian_aniso" || c.target_name == "double_well",
          "target", "expected gaussian_iso, gaussian_aniso or double_well");
  c.target.dim = get_positive_int(f, "dim");
  c.target.h = get_number(f, "h");
  c.target.beta = get_number(f, "beta");
  require(c.target.beta > 0.0, "beta", "must be > 0");
  if (present(f, "h_diag")) {
    c.target.h_diag = get_number_array(f, "h_diag");
    if (c.target_name == "gaussian_aniso") {
      c.target.dim = static_cast<int>(c.target.h_diag.size());
    }
  }
  if (present(f, "hessian")) {
    const Json& rows = f.at("hessian");
    require(rows.is_array() && !rows.empty(), "hessian", "expected a square array of arrays");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Matrix H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Json& row = rows[static_cast<std::size_t>(i)];
      require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n, "hessian", "rows must have length " +
                                                                                           std::to_string(n));
      for (Eigen::Index j = 0; j < n; ++j) {
        require(row[static_cast<std::size_t>(j)].is_number(), "hessian", "entries must be numbers");
        H(i, j) = row[static_cast<std::size_t>(j)].get<double>();
      }
    }
    c.target.hessian = H;
    c.target.dim = static_cast<int>(n);
  }
  c.target.poincare_const = get_optional_number(f, "poincare_const");

  c.observable_name = get_string(f, "observable");
  require(c.observable_name == "sin" || c.observable_name == "cos" || c.observable_name == "indicator" ||
              c.observable_name == "clipped_coord",
          "observable", "expected sin, cos, indicator or clipped_coord (raw coordinates are unbounded)");
  c.observable.omega = get_number(f, "omega");
  c.observable.a = get_number(f, "a");
  c.observable.b = get_number(f, "b");
  c.observable.clip = get_number(f, "clip");
  c.observable.coordinate = static_cast<int>(get_integer(f, "coordinate"));
  require(c.observable.coordinate >= 0 && c.observable.coordinate < c.target.dim, "coordinate",
          "must lie in [0, dim)");

  c.lambda_p = get_optional_number(f, "lambda_p");
  c.lambda_q = get_optional_number(f, "lambda_q");
  c.R0 = get_optional_number(f, "R0");
  if (present(f, "eps")) {
    const Json& e = f.at("eps");
    if (e.is_string()) {
      require(e.get<std::string>() == "auto", "eps", "expected a number in [0, 1) or \"auto\"");
    } else {
      c.eps = get_number(f, "eps");
    }
  }

  InitialCondition& init = s.options.initial;
  const std::string initial = get_string(f, "initial");
  if (initial == "stationary") {
    init.kind = InitialCondition::Kind::stationary;
  } else if (initial == "gaussian") {
    init.kind = InitialCondition::Kind::gaussian;
    init.mean = get_number(f, "initial_mean");
    init.sd = get_number(f, "initial_sd");
    require(init.sd > 0.0, "initial_sd", "must be > 0");
  } else if (initial == "fixed") {
    init.kind = InitialCondition::Kind::fixed;
    init.q0 = present(f, "q0") ? to_vector(get_number_array(f, "q0")) : Vector::Zero(c.target.dim);
    require(init.q0.size() == c.target.dim, "q0", "length must equal dim");
    if (present(f, "p0")) {
      init.p0 = to_vector(get_number_array(f, "p0"));
      require(init.p0->size() == c.target.dim, "p0", "length must equal dim");
    }
  } else {
    throw ConfigError("initial", "expected stationary, gaussian or fixed");
  }

  c.T = get_number(f, "T");
  require(c.T > 0.0 && std::isfinite(c.T), "T", "must be a finite positive number");
  c.delta = get_number(f, "delta");
  require(c.delta > 0.0 && c.delta < 1.0, "delta", "must lie in (0, 1)");
  c.replicas = get_positive_int(f, "replicas");
  c.seed = get_seed(f);
  c.threads = get_positive_int(f, "threads");
  c.r_grid_points = get_positive_int(f, "r_grid_points");
  c.lambda_grid_points = get_positive_int(f, "lambda_grid_points");
  const std::string perturbation = get_string(f, "perturbation");
  if (perturbation == "linear_tilt") {
    c.perturbation = Perturbation::linear_tilt;
  } else if (perturbation == "quadratic_tilt") {
    c.perturbation = Perturbation::quadratic_tilt;
  } else {
    throw ConfigError("perturbation", "expected linear_tilt or quadratic_tilt");
  }
  c.perturbation_sizes = get_number_array(f, "perturbation_sizes");
  return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hypoguard: finite-time error bounds for kinetic samplers"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&flags](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "JSON file with flat configuration keys");
    cmd->add_option("--seed", flags.seed, "root seed (default 0; overrides HYPOGUARD_SEED)");
    cmd->add_option("--out", flags.out_path, "write output here instead of stdout");
    cmd->add_option("--format", flags.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--threads", flags.threads, "maximum worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--set", flags.sets, "KEY=VALUE override (repeatable)");
    cmd->add_option("--sampler", flags.sampler, "bps, zigzag, hhmc or langevin");
    cmd->add_option("--eps", flags.eps, "number in [0, 1) or auto");
    cmd->add_option("--R0", flags.R0, "off-diagonal coupling bound");
    cmd->add_option("--T", flags.T, "time horizon");
    cmd->add_option("--delta", flags.delta, "confidence level parameter");
    cmd->add_option("--replicas", flags.replicas, "independent replicas");
    cmd->add_option("--reflection-coefficient", flags.reflection_coefficient,
                    "BPS reflection factor (2 is correct; other values inject a fault)");
  };
  std::string command;
  std::string which;
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, const std::string& cmd,
                  const std::string& sub) {
    CLI::App* c = parent->add_subcommand(name, help);
    add_common(c);
    c->callback([&command, &which, cmd, sub] {
      command = cmd;
      which = sub;
    });
  };
  leaf(&app, "constants", "hypocoercivity and Bernstein constants", "constants", "");
  leaf(&app, "ci", "two-sided confidence radius", "ci", "");
  leaf(&app, "sample", "simulate one trajectory", "sample", "");
  CLI::App* validate = app.add_subcommand("validate", "Monte-Carlo certification of a bound");
  validate->require_subcommand(1);
  for (const char* name : {"coverage", "tail", "mgf", "uq", "moments"}) {
    leaf(validate, name, std::string(name) + " experiment", "validate", name);
  }
  CLI::App* lab = app.add_subcommand("lab", "finite-dimensional operator checks");
  lab->require_subcommand(1);
  leaf(lab, "perturb", "perturbation lemma on random matrices", "lab", "perturb");
  leaf(lab, "eigen", "Lambda(eps) against a dense eigensolver", "lab", "eigen");

  std::vector<const char*> argv{"hypoguard"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string label = which.empty() ? command : command + " " + which;
  try {
    Json command_defaults = Json::object();
    if (which == "tail" || which == "mgf") {
      command_defaults["replicas"] = 500;
    } else if (which == "moments") {
      command_defaults["replicas"] = 50;
      command_defaults["T"] = 100.0;
    }
    const Json flat = resolve_flat(flags, command_defaults);
    const ExperimentConfig config = experiment_from_flat(flat);
    const bool csv = flags.format == "csv";

    if (command == "constants" || command == "ci") {
      const Constants k = constants_from(flat, config);
      Json result = constants_json(k);
      if (command == "ci") {
        const ConfidenceReport ci = confidence_radius(k.bern.pair, k.bern.pair, k.bern.N, config.delta, config.T);
        result["confidence"] = to_json(ci);
        result["trivial_range"] = 2.0 * k.stats.sup_norm;
        result["vacuous"] = ci.r_minus >= 2.0 * k.stats.sup_norm || ci.r_plus >= 2.0 * k.stats.sup_norm;
        if (present(flat, "target_radius")) {
          result["min_time_for_target_radius"] =
              min_time_for_radius(k.bern.pair, k.bern.N, config.delta, get_number(flat, "target_radius"));
        }
      }
      emit(csv ? key_value_csv(result) : dump_json(envelope(label, flat, result)) + "\n", flags.out_path, out);
      return 0;
    }
    if (command == "sample") {
      const TargetModel target = target_from(config);
      const Observable obs = builtin_observable(config.observable_name, config.observable, target);
      const Trajectory traj = run_sampler(config.sampler, target, config.T, config.seed);
      emit(csv ? trajectory_csv(traj) : dump_json(envelope(label, flat, sample_json(traj, obs))) + "\n",
           flags.out_path, out);
      return 0;
    }
    if (command == "lab") {
      Json result;
      if (which == "perturb") {
        result = to_json(verify_perturb_lemma(get_positive_int(flat, "lab_dim"), get_positive_int(flat, "lab_trials"),
                                              get_positive_int(flat, "lab_grid"), config.seed));
      } else {
        result = to_json(verify_lambda_eig(get_positive_int(flat, "eig_trials"), config.seed));
      }
      emit(csv ? key_value_csv(result) : dump_json(envelope(label, flat, result)) + "\n", flags.out_path, out);
      return 0;
    }

    ValidationReport report;
    if (which == "coverage") {
      report = coverage_experiment(config);
    } else if (which == "tail") {
      report = tail_experiment(config, present(flat, "r_grid") ? get_number_array(flat, "r_grid")
                                                               : std::vector<double>{});
    } else if (which == "mgf") {
      report = mgf_experiment(config, present(flat, "lambda_grid") ? get_number_array(flat, "lambda_grid")
                                                                   : std::vector<double>{});
    } else if (which == "uq") {
      report = uq_experiment(config);
    } else {
      report = moment_experiment(config);
    }
    if (csv) {
      std::string text = "replica,F_T\n";
      for (std::size_t i = 0; i < report.replica_values.size(); ++i) {
        text += std::to_string(i) + "," + dump_json(Json(report.replica_values[i]), -1) + "\n";
      }
      emit(text, flags.out_path, out);
    } else {
      emit(dump_json(envelope(label, flat, to_json(report))) + "\n", flags.out_path, out);
    }
    err << label << ": " << report.status << "\n";
    return report.pass ? 0 : kExitFail;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << label << ": " << e.what() << "\n";
    return kExitCompute;
  }
}

}  // namespace hypoguard::cli
