#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hypoguard/json_io.hpp"
#include "hypoguard/validation.hpp"

namespace hypoguard::cli {

/// Exit codes: 0 success (validate: pass), 1 validation not passed,
/// 2 configuration or usage error, 3 computation rejected the inputs.
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCompute = 3;

/// Every accepted flat configuration key with its default (null = unset / preset).
Json default_flat_config();

/// Builds an experiment from flat keys. Unknown keys and ill-typed values throw
/// ConfigError naming the key.
ExperimentConfig experiment_from_flat(const Json& flat);

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hypoguard::cli
