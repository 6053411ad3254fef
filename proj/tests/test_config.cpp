#include <doctest.h>

#include "sab/config.hpp"
#include "sab/errors.hpp"

using namespace sab;
using nlohmann::json;

TEST_CASE("defaults parse to the paper experiments") {
  const auto rate = parse_config(default_config_json(ExperimentKind::Rate), ExperimentKind::Rate);
  CHECK(rate.iterations == 5000);
  CHECK(rate.checkpoints.size() == 501u);
  CHECK(rate.checkpoints.front() == 0);
  CHECK(rate.checkpoints.back() == 5000);
  CHECK(rate.model.n == 20);

  const auto norm =
      parse_config(default_config_json(ExperimentKind::Normality), ExperimentKind::Normality);
  CHECK(norm.checkpoints == std::vector<long>{30000});
  CHECK(norm.algorithms == std::vector<Algorithm>{Algorithm::SAB});

  const auto cov =
      parse_config(default_config_json(ExperimentKind::Coverage), ExperimentKind::Coverage);
  CHECK(cov.checkpoints == std::vector<long>{2000, 5000, 15000, 30000});
}

TEST_CASE("unknown keys are rejected") {
  json base = default_config_json(ExperimentKind::Rate);
  CHECK_THROWS_WITH_AS(merge_config(base, json{{"schedule", {{"aa", 1.0}}}}),
                       "unknown config key 'schedule.aa'", ConfigError);
  CHECK_THROWS_AS(merge_config(base, json{{"extra", 1}}), ConfigError);
  CHECK_THROWS_AS(merge_config(base, json{{"schedule", 3}}), ConfigError);
}

TEST_CASE("overrides") {
  json cfg = default_config_json(ExperimentKind::Rate);
  apply_override(cfg, "schedule.a=0.1");
  apply_override(cfg, "replications=2");
  apply_override(cfg, "graph.kind=ring");
  apply_override(cfg, "algorithms=[\"SAB\"]");
  CHECK(cfg["schedule"]["a"] == 0.1);
  CHECK(cfg["experiment"]["replications"] == 2);
  CHECK(cfg["graph"]["kind"] == "ring");
  const auto parsed = parse_config(cfg, ExperimentKind::Rate);
  CHECK(parsed.schedule.a == 0.1);
  CHECK(parsed.replications == 2);
  CHECK(parsed.algorithms == std::vector<Algorithm>{Algorithm::SAB});

  CHECK_THROWS_AS(apply_override(cfg, "seed=3"), ConfigError);  // graph or experiment
  CHECK_THROWS_AS(apply_override(cfg, "nonsense=3"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "schedule.a"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "schedule.q=1"), ConfigError);
}

TEST_CASE("type and range errors") {
  auto with = [](const std::string& assignment) {
    json cfg = default_config_json(ExperimentKind::Coverage);
    apply_override(cfg, assignment);
    return parse_config(cfg, ExperimentKind::Coverage);
  };
  CHECK_THROWS_AS(with("replications=0"), ConfigError);
  CHECK_THROWS_AS(with("replications=2.5"), ConfigError);
  CHECK_THROWS_AS(with("schedule.a=\"big\""), ConfigError);
  CHECK_THROWS_AS(with("schedule.alpha=2"), ConfigError);
  CHECK_THROWS_AS(with("checkpoints=[10, 40000]"), ConfigError);
  CHECK_THROWS_AS(with("placement=grid"), ConfigError);
  CHECK_THROWS_AS(with("algorithms=[\"SGD\"]"), ConfigError);
  CHECK(with("beta=0.5").beta == 0.5);
}

TEST_CASE("explicit targets") {
  json cfg = default_config_json(ExperimentKind::Rate);
  apply_override(cfg, "graph.n=2");
  apply_override(cfg, "placement=explicit");
  apply_override(cfg, "xtilde=[[1,2,3],[4,5,6]]");
  const auto parsed = parse_config(cfg, ExperimentKind::Rate);
  CHECK(parsed.model.placement == TargetPlacement::Explicit);
  REQUIRE(parsed.model.xtilde.size() == 2u);
  CHECK(parsed.model.xtilde[1](2) == 6.0);
  apply_override(cfg, "xtilde=[[1,2,3]]");
  CHECK_THROWS_AS(parse_config(cfg, ExperimentKind::Rate), ConfigError);
}
