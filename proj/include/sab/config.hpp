#pragma once

#include <string>

#include <json.hpp>

#include "sab/montecarlo.hpp"

namespace sab {

/// Full default document {graph, model, schedule, experiment} for `kind`.
nlohmann::json default_config_json(ExperimentKind kind);

/// Recursively overlays `user` onto `base`. Keys absent from `base` are
/// rejected with ConfigError naming the dotted path.
void merge_config(nlohmann::json& base, const nlohmann::json& user);

/// Applies "path=value". The path is dotted ("schedule.a") or a bare key
/// that occurs in exactly one section ("replications"). The value is parsed
/// as JSON, falling back to a plain string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Strictly typed conversion; throws ConfigError on bad values.
ExperimentConfig parse_config(const nlohmann::json& config, ExperimentKind kind);

}  // namespace sab
