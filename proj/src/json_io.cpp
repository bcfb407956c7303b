#include "hypoguard/json_io.hpp"

#include <cmath>
#include <cstdio>

namespace hypoguard {

namespace {

void write_double(std::string& out, double x) {
  if (std::isnan(x)) {
    out += "\"nan\"";
    return;
  }
  if (std::isinf(x)) {
    out += x > 0 ? "\"inf\"" : "\"-inf\"";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
  // keep a marker that the value is floating point
  const std::string_view s(buf);
  if (s.find_first_of(".eE") == std::string_view::npos) {
    out += ".0";
  }
}

void newline(std::string& out, int indent, int depth) {
  if (indent < 0) {
    return;
  }
  out += '\n';
  out.append(static_cast<std::size_t>(indent * depth), ' ');
}

void write(std::string& out, const Json& v, int indent, int depth) {
  switch (v.type()) {
    case Json::value_t::number_float:
      write_double(out, v.get<double>());
      return;
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(out, indent, depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        write(out, it.value(), indent, depth + 1);
      }
      newline(out, indent, depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& item : v) {
        if (!first) out += ',';
        first = false;
        newline(out, indent, depth + 1);
        write(out, item, indent, depth + 1);
      }
      newline(out, indent, depth);
      out += ']';
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::string out;
  write(out, value, indent, 0);
  return out;
}

Json to_json(const BernsteinPair& pair) { return Json{{"v", pair.v}, {"b", pair.b}}; }

Json to_json(const HypoParams& params) {
  return Json{{"lambda_p", params.lambda_p}, {"lambda_q", params.lambda_q}, {"R0", params.R0}, {"eps", params.eps}};
}

Json to_json(const DerivedConstants& derived) {
  return Json{{"Lambda", derived.Lambda}, {"c", derived.c}, {"C", derived.C}, {"alpha", derived.alpha}};
}

Json to_json(const ObservableStats& stats) {
  return Json{{"mean", stats.mean}, {"variance", stats.variance}, {"sup_norm", stats.sup_norm}};
}

Json to_json(const ConfidenceReport& report) {
  return Json{{"T", report.T},
              {"delta", report.delta},
              {"N", report.N},
              {"eta", report.eta},
              {"r_minus", report.r_minus},
              {"r_plus", report.r_plus},
              {"pair_plus", to_json(report.pair_plus)},
              {"pair_minus", to_json(report.pair_minus)}};
}

Json to_json(const UQReport& report) {
  return Json{{"eta_T", report.eta_T},
              {"rel_entropy", report.rel_entropy},
              {"transient", report.transient},
              {"bound_plus", report.bound_plus},
              {"bound_minus", report.bound_minus}};
}

Json to_json(const Check& check) {
  return Json{{"name", check.name},   {"lhs", check.lhs},         {"rhs", check.rhs},
              {"slack", check.slack}, {"vacuous", check.vacuous}, {"pass", check.pass}};
}

Json to_json(const ValidationReport& report) {
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back(to_json(c));
  }
  Json j{{"experiment", report.experiment},
         {"status", report.status},
         {"pass", report.pass},
         {"certified_sampler", report.certified_sampler},
         {"hypo", to_json(report.hypo)},
         {"derived", to_json(report.derived)},
         {"pair", to_json(report.pair)},
         {"N", report.N},
         {"dmu_norm", report.dmu_norm},
         {"stats", to_json(report.stats)}};
  if (report.experiment == "coverage") {
    j["r_minus"] = report.r_minus;
    j["r_plus"] = report.r_plus;
    j["coverage"] = report.coverage;
    j["coverage_threshold"] = report.coverage_threshold;
  }
  j["checks"] = checks;
  j["notes"] = report.notes;
  j["replica_values"] = report.replica_values;
  return j;
}

Json to_json(const PerturbLemmaReport& report) {
  return Json{{"dim", report.dim},
              {"trials", report.trials},
              {"grid_size", report.grid_size},
              {"seed", report.seed},
              {"checks", report.checks},
              {"violations", report.violations},
              {"max_violation", report.max_violation},
              {"min_slack", report.min_slack},
              {"max_slack", report.max_slack},
              {"small_lambda_ratio", report.small_lambda_ratio},
              {"pass", report.pass}};
}

Json to_json(const LambdaEigReport& report) {
  return Json{{"trials", report.trials},
              {"seed", report.seed},
              {"max_abs_deviation", report.max_abs_deviation},
              {"max_eps_max_deviation", report.max_eps_max_deviation},
              {"max_abs_lambda_at_eps_max", report.max_abs_lambda_at_eps_max},
              {"threshold_checks", report.threshold_checks},
              {"pass", report.pass}};
}

Json to_json(const Vector& x) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    j.push_back(x[i]);
  }
  return j;
}

}  // namespace hypoguard
