#include "sab/report.hpp"

#include <ostream>

#include "sab/format.hpp"

namespace sab {

using nlohmann::json;

json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

json to_json(const GroundTruth& truth) {
  return {{"x_star", to_json(truth.x_star)},
          {"H", to_json(truth.H)},
          {"S", to_json(truth.S)},
          {"S_stderr", to_json(truth.S_stderr)},
          {"Sigma", to_json(truth.Sigma)},
          {"mc_samples", truth.mc_samples}};
}

json to_json(const EigenPair& pair) {
  return {{"u", to_json(pair.u)}, {"v", to_json(pair.v)}, {"uv", pair.uv}};
}

json to_json(const ScheduleReport& report) {
  return {{"initial_step", report.initial_step},
          {"step_bound", report.step_bound},
          {"step_bound_ok", report.step_bound_ok},
          {"exponent_ok", report.exponent_ok},
          {"rate_condition_applies", report.rate_condition_applies},
          {"rate_threshold", report.rate_threshold},
          {"rate_condition_ok", report.rate_condition_ok},
          {"valid", report.valid()},
          {"warnings", report.warnings}};
}

json to_json(const ReplicationRecord& record) {
  json out = {{"rep_id", record.rep_id},
              {"diverged", record.diverged},
              {"checkpoints", record.checkpoints},
              {"floor_hits", record.floor_hits}};
  if (record.diverged) out["failure"] = record.failure;
  json traces = json::array();
  for (const auto& trace : record.traces) {
    json metrics = json::array();
    for (const auto& m : trace.metrics)
      metrics.push_back({{"mse", m.mse},
                         {"weighted_error", m.weighted_error},
                         {"consensus_error", m.consensus_error}});
    traces.push_back({{"algorithm", to_string(trace.algorithm)}, {"metrics", metrics}});
  }
  out["traces"] = traces;
  json inference = json::array();
  for (const auto& snap : record.inference) {
    json s = {{"k", snap.k},
              {"pr_agent", to_json(snap.pr_agent)},
              {"pr_average", to_json(snap.pr_network)}};
    if (snap.sigma_agent.size() > 0) {
      s["sigma_agent"] = to_json(snap.sigma_agent);
      s["sigma_average"] = to_json(snap.sigma_network);
      s["max_pairwise_sigma"] = snap.max_pairwise_sigma;
      s["covered_agent"] = snap.covered_agent;
      s["covered_average"] = snap.covered_network;
      s["singular"] = snap.singular;
    }
    inference.push_back(std::move(s));
  }
  out["inference"] = inference;
  return out;
}

json to_json(const EnsembleSummary& summary) {
  json out = {{"experiment", to_string(summary.kind)},
              {"replications", summary.replications},
              {"completed", summary.completed},
              {"diverged", summary.diverged_ids},
              {"checkpoints", summary.checkpoints},
              {"x_star", to_json(summary.x_star)},
              {"floor_hits", summary.floor_hits}};
  json curves = json::array();
  for (const auto& c : summary.curves)
    curves.push_back({{"algorithm", to_string(c.algorithm)},
                      {"metric", c.metric},
                      {"mean", c.mean},
                      {"stderr", c.std_error}});
  out["curves"] = curves;
  json inference = json::array();
  for (const auto& inf : summary.inference) {
    const double evaluated = inf.evaluated > 0 ? inf.evaluated : 1;
    inference.push_back({{"k", inf.k},
                         {"evaluated", inf.evaluated},
                         {"covered_agent", inf.covered_agent},
                         {"covered_average", inf.covered_network},
                         {"coverage_agent_pct", 100.0 * inf.covered_agent / evaluated},
                         {"coverage_average_pct", 100.0 * inf.covered_network / evaluated},
                         {"sigma_rel_error_agent", inf.sigma_error_agent},
                         {"sigma_rel_error_average", inf.sigma_error_network},
                         {"max_pairwise_sigma_rel", inf.max_pairwise_sigma}});
  }
  out["inference"] = inference;
  if (summary.truth) out["ground_truth"] = to_json(*summary.truth);
  return out;
}

void write_curves_csv(const EnsembleSummary& summary, std::ostream& os) {
  os << "k,algorithm,metric,mean,stderr\n";
  for (std::size_t c = 0; c < summary.checkpoints.size(); ++c) {
    for (const auto& curve : summary.curves) {
      os << summary.checkpoints[c] << ',' << to_string(curve.algorithm) << ','
         << curve.metric << ',' << format_real(curve.mean[c]) << ','
         << format_real(curve.std_error[c]) << '\n';
    }
  }
}

void write_coverage_table_csv(const EnsembleSummary& summary, std::ostream& os) {
  os << "method";
  for (const auto& inf : summary.inference) os << ',' << inf.k;
  os << '\n';
  auto row = [&](const char* label, auto hits) {
    os << label;
    for (const auto& inf : summary.inference) {
      const double evaluated = inf.evaluated > 0 ? inf.evaluated : 1;
      os << ',' << format_real(100.0 * hits(inf) / evaluated);
    }
    os << '\n';
  };
  row("PI", [](const InferenceSummary& s) { return s.covered_agent; });
  row("PIave", [](const InferenceSummary& s) { return s.covered_network; });
}

void write_normality_csv(const EnsembleSummary& summary, std::ostream& os) {
  os << "k,series,replication,component,value\n";
  for (const auto& inf : summary.inference) {
    for (const auto& [label, samples] :
         {std::pair<const char*, const Matrix*>{"agent", &inf.normality_agent},
          std::pair<const char*, const Matrix*>{"average", &inf.normality_network}}) {
      for (Eigen::Index r = 0; r < samples->rows(); ++r)
        for (Eigen::Index c = 0; c < samples->cols(); ++c)
          os << inf.k << ',' << label << ',' << r << ',' << c << ','
             << format_real((*samples)(r, c)) << '\n';
    }
  }
}

}  // namespace sab
