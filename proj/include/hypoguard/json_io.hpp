#pragma once

#include <string>

#include <json.hpp>

#include "hypoguard/guarantees.hpp"
#include "hypoguard/operator_lab.hpp"
#include "hypoguard/samplers.hpp"
#include "hypoguard/validation.hpp"

namespace hypoguard {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Serializes with every double printed to 17 significant digits, so values
/// round-trip exactly. Non-finite doubles become the strings "inf", "-inf", "nan".
std::string dump_json(const Json& value, int indent = 2);

Json to_json(const BernsteinPair& pair);
Json to_json(const HypoParams& params);
Json to_json(const DerivedConstants& derived);
Json to_json(const ObservableStats& stats);
Json to_json(const ConfidenceReport& report);
Json to_json(const UQReport& report);
Json to_json(const Check& check);
Json to_json(const ValidationReport& report);
Json to_json(const PerturbLemmaReport& report);
Json to_json(const LambdaEigReport& report);
Json to_json(const Vector& x);

}  // namespace hypoguard
