#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sab/montecarlo.hpp"

namespace sab::cli {

enum ExitCode : int { kSuccess = 0, kExperimentFailure = 1, kUsageError = 2 };

struct CliInvocation {
  std::string subcommand;  // rate | normality | coverage | validate | ground-truth
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> parallelism;
  std::vector<std::string> overrides;
  bool quiet = false;
};

/// Defaults for the subcommand, overlaid with the config file, --override
/// assignments, then --seed/--parallelism. Throws ConfigError.
nlohmann::json resolve_config(const CliInvocation& invocation);

int cmd_rate(const nlohmann::json& resolved, const CliInvocation& invocation);
int cmd_normality(const nlohmann::json& resolved, const CliInvocation& invocation);
int cmd_coverage(const nlohmann::json& resolved, const CliInvocation& invocation);
int cmd_validate(const nlohmann::json& resolved, const CliInvocation& invocation);
int cmd_ground_truth(const nlohmann::json& resolved, const CliInvocation& invocation);

/// Resolves the config and dispatches; maps errors onto exit codes.
int execute(const CliInvocation& invocation);

/// Parses argv and calls execute().
int run(int argc, char** argv);

}  // namespace sab::cli
