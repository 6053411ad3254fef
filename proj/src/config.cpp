#include "sab/config.hpp"

#include <vector>

#include "sab/errors.hpp"

namespace sab {

using nlohmann::json;

json default_config_json(ExperimentKind kind) {
  const ExperimentConfig paper = ExperimentConfig::paper(kind);
  const RidgeConfig& m = paper.model;
  json experiment = {
      {"iterations", paper.iterations},
      {"replications", paper.replications},
      {"checkpoints", json::array()},
      {"checkpoint_every", 0},
      {"algorithms", json::array()},
      {"seed", paper.seed},
      {"parallelism", paper.parallelism},
      {"beta", paper.beta},
      {"burn_in", paper.burn_in},
      {"tracked_agent", paper.tracked_agent},
      {"mc_samples", paper.mc_samples},
      {"truth_seed", paper.truth_seed},
  };
  for (Algorithm a : paper.algorithms) experiment["algorithms"].push_back(to_string(a));
  if (kind == ExperimentKind::Rate)
    experiment["checkpoint_every"] = 10;
  else if (kind == ExperimentKind::Coverage)
    experiment["checkpoints"] = paper.checkpoints;

  return {
      {"graph",
       {{"kind", paper.graph.kind},
        {"n", paper.graph.n},
        {"p", paper.graph.p},
        {"seed", paper.graph.seed},
        {"per_replication", paper.graph.per_replication}}},
      {"model",
       {{"d", m.d},
        {"gamma", m.gamma},
        {"w_low", m.w_low},
        {"w_high", m.w_high},
        {"noise_sd", m.noise_sd},
        {"xtilde_low", m.xtilde_low},
        {"xtilde_high", m.xtilde_high},
        {"placement", "diagonal"},
        {"xtilde", json::array()}}},
      {"schedule",
       {{"a", paper.schedule.a}, {"b", paper.schedule.b}, {"alpha", paper.schedule.alpha}}},
      {"experiment", experiment},
  };
}

namespace {

void merge_at(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key '" + where + "'");
    if (base[key].is_object())
      merge_at(base[key], value, where);
    else
      base[key] = value;
  }
}

template <typename T>
T get(const json& section, const char* key, const char* where) {
  try {
    return section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config value '") + where + "." + key +
                      "' has the wrong type");
  }
}

double get_number(const json& section, const char* key, const char* where) {
  const json& v = section.at(key);
  if (!v.is_number())
    throw ConfigError(std::string("config value '") + where + "." + key +
                      "' must be a number");
  return v.get<double>();
}

long get_integer(const json& section, const char* key, const char* where) {
  const json& v = section.at(key);
  if (!v.is_number_integer())
    throw ConfigError(std::string("config value '") + where + "." + key +
                      "' must be an integer");
  return v.get<long>();
}

}  // namespace

void merge_config(json& base, const json& user) { merge_at(base, user, ""); }

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t dot; (dot = path.find('.', start)) != std::string::npos; start = dot + 1)
    parts.push_back(path.substr(start, dot - start));
  parts.push_back(path.substr(start));

  if (parts.size() == 1) {
    std::vector<std::string> owners;
    for (const auto& [section, body] : config.items())
      if (body.is_object() && body.contains(parts[0])) owners.push_back(section);
    if (owners.size() != 1)
      throw ConfigError(owners.empty() ? "unknown config key '" + path + "'"
                                       : "ambiguous config key '" + path +
                                             "'; use section.key");
    parts.insert(parts.begin(), owners.front());
  }

  json* node = &config;
  for (const auto& part : parts) {
    if (!node->is_object() || !node->contains(part))
      throw ConfigError("unknown config key '" + path + "'");
    node = &(*node)[part];
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  *node = value;
}

ExperimentConfig parse_config(const json& config, ExperimentKind kind) {
  json resolved = default_config_json(kind);
  merge_config(resolved, config);

  ExperimentConfig out;
  out.kind = kind;
  const json& g = resolved.at("graph");
  out.graph.kind = get<std::string>(g, "kind", "graph");
  out.graph.n = static_cast<int>(get_integer(g, "n", "graph"));
  out.graph.p = get_number(g, "p", "graph");
  out.graph.seed = get<std::uint64_t>(g, "seed", "graph");
  out.graph.per_replication = get<bool>(g, "per_replication", "graph");
  if (out.graph.n < 1) throw ConfigError("graph.n must be >= 1");
  if (out.graph.kind != "ring_plus_random" && out.graph.kind != "ring" &&
      out.graph.kind != "complete" && out.graph.kind != "empty")
    throw ConfigError("graph.kind must be ring_plus_random, ring, complete or empty");
  if (!(out.graph.p >= 0.0 && out.graph.p <= 1.0))
    throw ConfigError("graph.p must lie in [0, 1]");

  const json& m = resolved.at("model");
  out.model.n = out.graph.n;
  out.model.d = static_cast<int>(get_integer(m, "d", "model"));
  out.model.gamma = get_number(m, "gamma", "model");
  out.model.w_low = get_number(m, "w_low", "model");
  out.model.w_high = get_number(m, "w_high", "model");
  out.model.noise_sd = get_number(m, "noise_sd", "model");
  out.model.xtilde_low = get_number(m, "xtilde_low", "model");
  out.model.xtilde_high = get_number(m, "xtilde_high", "model");
  const auto placement = get<std::string>(m, "placement", "model");
  if (placement == "diagonal") {
    out.model.placement = TargetPlacement::Diagonal;
  } else if (placement == "explicit") {
    out.model.placement = TargetPlacement::Explicit;
    const auto rows = get<std::vector<std::vector<double>>>(m, "xtilde", "model");
    for (const auto& row : rows)
      out.model.xtilde.push_back(Eigen::Map<const Vector>(row.data(), row.size()));
    if (static_cast<int>(rows.size()) != out.model.n)
      throw ConfigError("model.xtilde must list one target per agent");
    for (const auto& row : rows)
      if (static_cast<int>(row.size()) != out.model.d)
        throw ConfigError("model.xtilde rows must have model.d entries");
  } else {
    throw ConfigError("model.placement must be 'diagonal' or 'explicit'");
  }
  if (out.model.d < 1) throw ConfigError("model.d must be >= 1");
  if (!(out.model.gamma >= 0.0)) throw ConfigError("model.gamma must be >= 0");
  if (!(out.model.w_low <= out.model.w_high))
    throw ConfigError("model.w_low must not exceed model.w_high");
  if (!(out.model.noise_sd >= 0.0)) throw ConfigError("model.noise_sd must be >= 0");

  const json& s = resolved.at("schedule");
  try {
    out.schedule = StepSchedule(get_number(s, "a", "schedule"), get_number(s, "b", "schedule"),
                                get_number(s, "alpha", "schedule"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }

  const json& e = resolved.at("experiment");
  out.iterations = get_integer(e, "iterations", "experiment");
  out.replications = static_cast<int>(get_integer(e, "replications", "experiment"));
  out.seed = get<std::uint64_t>(e, "seed", "experiment");
  out.parallelism = static_cast<int>(get_integer(e, "parallelism", "experiment"));
  out.beta = get_number(e, "beta", "experiment");
  out.burn_in = get_integer(e, "burn_in", "experiment");
  out.tracked_agent = static_cast<int>(get_integer(e, "tracked_agent", "experiment"));
  out.mc_samples = get_integer(e, "mc_samples", "experiment");
  out.truth_seed = get<std::uint64_t>(e, "truth_seed", "experiment");
  out.algorithms.clear();
  for (const auto& name : get<std::vector<std::string>>(e, "algorithms", "experiment"))
    out.algorithms.push_back(parse_algorithm(name));

  const auto listed = get<std::vector<long>>(e, "checkpoints", "experiment");
  const long every = get_integer(e, "checkpoint_every", "experiment");
  if (every < 0) throw ConfigError("experiment.checkpoint_every must be >= 0");
  if (!listed.empty()) {
    out.checkpoints = listed;
  } else if (every > 0) {
    for (long k = 0; k <= out.iterations; k += every) out.checkpoints.push_back(k);
    if (out.checkpoints.back() != out.iterations) out.checkpoints.push_back(out.iterations);
  } else {
    out.checkpoints = {out.iterations};
  }
  out.validate();
  return out;
}

}  // namespace sab
