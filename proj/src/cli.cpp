#include "sab/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sab/config.hpp"
#include "sab/errors.hpp"
#include "sab/inference.hpp"
#include "sab/report.hpp"

namespace sab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kMinKsSamples = 20;
constexpr double kSlopeTailFraction = 0.5;

ExperimentKind kind_for(const std::string& subcommand) {
  if (subcommand == "normality") return ExperimentKind::Normality;
  if (subcommand == "coverage") return ExperimentKind::Coverage;
  return ExperimentKind::Rate;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << content;
  if (!os) throw Error("failed writing " + path.string());
}

void prepare_output(const json& resolved, const CliInvocation& inv) {
  std::error_code ec;
  fs::create_directories(inv.out_dir, ec);
  if (ec) throw Error("cannot create output directory " + inv.out_dir.string());
  json echo = resolved;
  echo["subcommand"] = inv.subcommand;
  write_file(inv.out_dir / "config.json", echo.dump(2) + "\n");
}

json records_json(const std::vector<ReplicationRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back(to_json(r));
  return out;
}

std::ostream& info(const CliInvocation& inv) {
  static std::ostringstream sink;
  if (inv.quiet) {
    sink.str("");
    return sink;
  }
  return std::cout;
}

}  // namespace

json resolve_config(const CliInvocation& inv) {
  json resolved = default_config_json(kind_for(inv.subcommand));
  if (inv.config_path) {
    if (!fs::exists(*inv.config_path))
      throw ConfigError("config not found: " + inv.config_path->string());
    std::ifstream is(*inv.config_path);
    json user = json::parse(is, nullptr, false);
    if (user.is_discarded())
      throw ConfigError("config is not valid JSON: " + inv.config_path->string());
    merge_config(resolved, user);
  }
  for (const auto& assignment : inv.overrides) apply_override(resolved, assignment);
  if (inv.seed) resolved["experiment"]["seed"] = *inv.seed;
  if (inv.parallelism) resolved["experiment"]["parallelism"] = *inv.parallelism;
  return resolved;
}

int cmd_rate(const json& resolved, const CliInvocation& inv) {
  const ExperimentConfig config = parse_config(resolved, ExperimentKind::Rate);
  prepare_output(resolved, inv);
  const auto records = run_replications(config);
  const EnsembleSummary summary = summarize_ensemble(config, records);

  std::ostringstream curves;
  write_curves_csv(summary, curves);
  write_file(inv.out_dir / "rate_curves.csv", curves.str());

  json report = to_json(summary);
  json slopes = json::object();
  for (Algorithm a : config.algorithms) {
    const auto& curve = summary.curve(a, "weighted_error");
    std::vector<std::pair<double, double>> points;
    for (std::size_t c = 0; c < summary.checkpoints.size(); ++c)
      if (summary.checkpoints[c] > 0)
        points.emplace_back(static_cast<double>(summary.checkpoints[c]), curve.mean[c]);
    try {
      slopes[to_string(a)] = loglog_slope(points, kSlopeTailFraction);
    } catch (const InvalidArgument& e) {
      slopes[to_string(a)] = nullptr;
      std::cerr << "warning: slope for " << to_string(a) << " unavailable: " << e.what()
                << "\n";
    }
    const auto& final_mse = summary.curve(a, "mse").mean.back();
    info(inv) << to_string(a) << ": final mean error " << final_mse << ", tail slope "
              << slopes[to_string(a)].dump() << "\n";
  }
  report["slope_report"] = {{"metric", "weighted_error"},
                            {"tail_fraction", kSlopeTailFraction},
                            {"slopes", slopes}};
  write_file(inv.out_dir / "rate_summary.json", report.dump(2) + "\n");
  write_file(inv.out_dir / "replications.json", records_json(records).dump() + "\n");
  info(inv) << "completed " << summary.completed << "/" << summary.replications
            << " replications; wrote " << (inv.out_dir / "rate_curves.csv").string() << "\n";
  return kSuccess;
}

int cmd_normality(const json& resolved, const CliInvocation& inv) {
  const ExperimentConfig config = parse_config(resolved, ExperimentKind::Normality);
  prepare_output(resolved, inv);
  const auto records = run_replications(config);
  const EnsembleSummary summary = summarize_ensemble(config, records);

  std::ostringstream samples;
  write_normality_csv(summary, samples);
  write_file(inv.out_dir / "normality_samples.csv", samples.str());

  json report = to_json(summary);
  json ks = json::array();
  const Matrix& sigma = summary.truth->Sigma;
  for (const auto& inf : summary.inference) {
    if (inf.evaluated < kMinKsSamples) {
      std::cerr << "warning: " << inf.evaluated << " samples at k = " << inf.k
                << " are too few for a KS test; skipped\n";
      continue;
    }
    for (const auto& [label, data] :
         {std::pair<const char*, const Matrix*>{"agent", &inf.normality_agent},
          std::pair<const char*, const Matrix*>{"average", &inf.normality_network}}) {
      for (Eigen::Index c = 0; c < data->cols(); ++c) {
        const Vector column = data->col(c);
        const double sd = std::sqrt(sigma(c, c));
        const KsResult result =
            ks_statistic(std::span<const double>(column.data(), column.size()), 0.0, sd);
        ks.push_back({{"k", inf.k},
                      {"series", label},
                      {"component", c},
                      {"sd", sd},
                      {"D", result.D},
                      {"critical_5pct", result.critical_5pct},
                      {"rejects", result.rejects()}});
        info(inv) << "k=" << inf.k << " " << label << "[" << c << "]: D=" << result.D
                  << " (critical " << result.critical_5pct << ")"
                  << (result.rejects() ? " REJECT" : " ok") << "\n";
      }
    }
  }
  report["ks"] = ks;
  write_file(inv.out_dir / "normality_summary.json", report.dump(2) + "\n");
  return kSuccess;
}

int cmd_coverage(const json& resolved, const CliInvocation& inv) {
  const ExperimentConfig config = parse_config(resolved, ExperimentKind::Coverage);
  prepare_output(resolved, inv);
  const auto records = run_replications(config);
  const EnsembleSummary summary = summarize_ensemble(config, records);

  std::ostringstream table;
  write_coverage_table_csv(summary, table);
  write_file(inv.out_dir / "coverage_table.csv", table.str());
  write_file(inv.out_dir / "coverage_summary.json", to_json(summary).dump(2) + "\n");
  write_file(inv.out_dir / "replications.json", records_json(records).dump() + "\n");
  info(inv) << table.str();
  if (summary.floor_hits > 0)
    std::cerr << "note: plug-in rescaling floor hit " << summary.floor_hits << " times\n";
  return kSuccess;
}

int cmd_validate(const json& resolved, const CliInvocation& inv) {
  const ExperimentConfig config = parse_config(resolved, ExperimentKind::Rate);
  prepare_output(resolved, inv);
  std::ostream& out = info(inv);
  bool ok = true;
  json report;

  const DirectedGraph graph = build_graph(config.graph);
  const WeightMatrix A = pull_matrix(graph);
  const WeightMatrix B = push_matrix(graph);
  const WeightMatrix W = metropolis_matrix(graph);
  out << "graph: n=" << graph.size() << " edges=" << graph.edges().size()
      << " strongly_connected=" << (strongly_connected(graph) ? "yes" : "no") << "\n";
  out << "A row residual " << A.row_residual() << ", min diagonal "
      << A.matrix().diagonal().minCoeff() << "\n";
  out << "B column residual " << B.column_residual() << ", min diagonal "
      << B.matrix().diagonal().minCoeff() << "\n";
  out << "W row residual " << W.row_residual() << ", column residual "
      << W.column_residual() << "\n";
  report["residuals"] = {{"A_row", A.row_residual()},
                         {"B_column", B.column_residual()},
                         {"W_row", W.row_residual()},
                         {"W_column", W.column_residual()}};

  const auto pull_roots = root_set(graph);
  const auto push_roots = root_set(graph.transpose());
  const bool topology = shares_spanning_root(graph, graph);
  out << "roots: pull " << pull_roots.size() << ", push-transpose " << push_roots.size()
      << ", common root " << (topology ? "yes" : "NO") << "\n";
  report["topology"] = {{"pull_roots", pull_roots},
                        {"push_transpose_roots", push_roots},
                        {"common_root", topology}};
  ok = ok && topology;

  try {
    const EigenPair pair = perron_vectors(A, B);
    const double u_residual = (pair.u.transpose() * A.matrix() - pair.u.transpose())
                                  .cwiseAbs().maxCoeff();
    const double v_residual = (B.matrix() * pair.v - pair.v).cwiseAbs().maxCoeff();
    out << "perron: u^T v = " << pair.uv << ", u in [" << pair.u.minCoeff() << ", "
        << pair.u.maxCoeff() << "], v in [" << pair.v.minCoeff() << ", "
        << pair.v.maxCoeff() << "], residuals " << u_residual << " / " << v_residual
        << "\n";
    report["perron"] = to_json(pair);
    report["perron"]["u_residual"] = u_residual;
    report["perron"]["v_residual"] = v_residual;

    const double tau_a = contraction_diagnostic(A, pair);
    const double tau_b = contraction_diagnostic(B, pair);
    const double tau_w = contraction_diagnostic(W, pair);
    out << "contraction diagnostic: A " << tau_a << ", B " << tau_b << ", W " << tau_w
        << "\n";
    report["contraction"] = {{"A", tau_a}, {"B", tau_b}, {"W", tau_w}};
    ok = ok && tau_a < 1.0 && tau_b < 1.0 && tau_w < 1.0;

    const RidgeModel model(config.model);
    const ScheduleReport schedule = validate_schedule(
        config.schedule, pair, model.lipschitz(), model.strong_convexity(), graph.size());
    out << "schedule: a/b^alpha = " << schedule.initial_step << ", bound "
        << schedule.step_bound << " (L = " << model.lipschitz()
        << ", mu = " << model.strong_convexity() << ")"
        << (schedule.valid() ? ", valid" : "") << "\n";
    for (const auto& w : schedule.warnings) std::cerr << "warning: " << w << "\n";
    report["schedule"] = to_json(schedule);
    report["schedule"]["L"] = model.lipschitz();
    report["schedule"]["mu"] = model.strong_convexity();
  } catch (const ConvergenceError& e) {
    out << "perron: FAILED (" << e.what() << ", residual " << e.residual() << ")\n";
    report["perron"] = {{"error", e.what()}, {"residual", e.residual()}};
    ok = false;
  }
  report["passed"] = ok;
  write_file(inv.out_dir / "validate_report.json", report.dump(2) + "\n");
  out << (ok ? "all checks passed" : "CHECKS FAILED") << "\n";
  return ok ? kSuccess : kExperimentFailure;
}

int cmd_ground_truth(const json& resolved, const CliInvocation& inv) {
  const ExperimentConfig config = parse_config(resolved, ExperimentKind::Rate);
  prepare_output(resolved, inv);
  const RidgeModel model(config.model);
  const GroundTruth truth = ground_truth(model, config.mc_samples, config.truth_seed);
  json out = to_json(truth);
  out["seed"] = config.truth_seed;
  out["warnings"] = json::array();
  if (config.mc_samples < 100000) {
    const std::string warning = "only " + std::to_string(config.mc_samples) +
                                " Monte Carlo samples; S has large standard error";
    std::cerr << "warning: " << warning << "\n";
    out["warnings"].push_back(warning);
  }
  write_file(inv.out_dir / "ground_truth.json", out.dump(2) + "\n");
  info(inv) << "x* = " << truth.x_star.transpose() << "\n";
  return kSuccess;
}

int execute(const CliInvocation& inv) {
  try {
    const json resolved = resolve_config(inv);
    if (inv.subcommand == "rate") return cmd_rate(resolved, inv);
    if (inv.subcommand == "normality") return cmd_normality(resolved, inv);
    if (inv.subcommand == "coverage") return cmd_coverage(resolved, inv);
    if (inv.subcommand == "validate") return cmd_validate(resolved, inv);
    if (inv.subcommand == "ground-truth") return cmd_ground_truth(resolved, inv);
    std::cerr << "error: unknown subcommand '" << inv.subcommand << "'\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExperimentFailure;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Push-pull stochastic gradient tracking experiments"};
  app.require_subcommand(1);
  CliInvocation inv;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int parallelism = 0;

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"rate", "convergence-rate ensemble for SAB, DSGT and DSGD"},
      {"normality", "Polyak-Ruppert normality samples and KS report"},
      {"coverage", "plug-in confidence-region coverage table"},
      {"validate", "check weight matrices, topology and step-size conditions"},
      {"ground-truth", "x*, H, S and Sigma for the configured model"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "base seed (experiment.seed)");
    sub->add_option("--parallelism", parallelism, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--override", inv.overrides, "key=value (repeatable)");
    sub->add_flag("--quiet", inv.quiet, "suppress the human-readable summary");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsageError;
  }
  for (CLI::App* sub : subs) {
    if (!sub->parsed()) continue;
    inv.subcommand = sub->get_name();
    if (sub->count("--config") > 0) inv.config_path = config_path;
    if (sub->count("--seed") > 0) inv.seed = seed;
    if (sub->count("--parallelism") > 0) inv.parallelism = parallelism;
  }
  inv.out_dir = out_dir;
  return execute(inv);
}

}  // namespace sab::cli
