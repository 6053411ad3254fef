#include "sab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "sab/errors.hpp"
#include "sab/inference.hpp"
#include "sab/rng.hpp"

namespace sab {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::SAB: return "SAB";
    case Algorithm::DSGT: return "DSGT";
    case Algorithm::DSGD: return "DSGD";
  }
  return "?";
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Rate: return "rate";
    case ExperimentKind::Normality: return "normality";
    case ExperimentKind::Coverage: return "coverage";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "SAB") return Algorithm::SAB;
  if (name == "DSGT") return Algorithm::DSGT;
  if (name == "DSGD") return Algorithm::DSGD;
  throw ConfigError("unknown algorithm '" + name + "' (expected SAB, DSGT or DSGD)");
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "rate") return ExperimentKind::Rate;
  if (name == "normality") return ExperimentKind::Normality;
  if (name == "coverage") return ExperimentKind::Coverage;
  throw ConfigError("unknown experiment kind '" + name + "'");
}

DirectedGraph build_graph(const GraphConfig& config, std::uint64_t seed_offset) {
  if (config.kind == "ring_plus_random")
    return ring_plus_random(config.n, config.p, config.seed + seed_offset);
  if (config.kind == "ring") return ring_graph(config.n);
  if (config.kind == "complete") return complete_graph(config.n);
  if (config.kind == "empty") return empty_graph(config.n);
  throw ConfigError("unknown graph kind '" + config.kind + "'");
}

ExperimentConfig ExperimentConfig::paper(ExperimentKind kind) {
  ExperimentConfig config;
  config.kind = kind;
  config.schedule = StepSchedule(0.05, 1.0, 0.6);
  switch (kind) {
    case ExperimentKind::Rate:
      config.iterations = 5000;
      config.replications = 50;
      for (long k = 0; k <= config.iterations; k += 10) config.checkpoints.push_back(k);
      config.algorithms = {Algorithm::SAB, Algorithm::DSGT, Algorithm::DSGD};
      break;
    case ExperimentKind::Normality:
      config.iterations = 30000;
      config.replications = 500;
      config.checkpoints = {30000};
      config.algorithms = {Algorithm::SAB};
      break;
    case ExperimentKind::Coverage:
      config.iterations = 30000;
      config.replications = 500;
      config.checkpoints = {2000, 5000, 15000, 30000};
      config.algorithms = {Algorithm::SAB};
      break;
  }
  return config;
}

void ExperimentConfig::validate() const {
  if (iterations < 0) throw ConfigError("experiment.iterations must be >= 0");
  if (replications < 1) throw ConfigError("experiment.replications must be >= 1");
  if (parallelism < 1) throw ConfigError("experiment.parallelism must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("experiment.beta must lie in (0, 1)");
  if (burn_in < 0) throw ConfigError("experiment.burn_in must be >= 0");
  if (graph.n < 1) throw ConfigError("graph.n must be >= 1");
  if (model.n != graph.n) throw ConfigError("model and graph disagree on n");
  if (tracked_agent < 0 || tracked_agent >= graph.n)
    throw ConfigError("experiment.tracked_agent out of range");
  if (algorithms.empty()) throw ConfigError("experiment.algorithms must be nonempty");
  if (tracks_average() &&
      std::find(algorithms.begin(), algorithms.end(), Algorithm::SAB) == algorithms.end())
    throw ConfigError("normality and coverage experiments require SAB");
  if (mc_samples < 2) throw ConfigError("experiment.mc_samples must be >= 2");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 0 || checkpoints[i] > iterations)
      throw ConfigError("checkpoint " + std::to_string(checkpoints[i]) +
                        " outside [0, iterations]");
    if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
      throw ConfigError("checkpoints must be strictly increasing");
  }
}

ExperimentSetup prepare_setup(const ExperimentConfig& config,
                              std::uint64_t graph_seed_offset) {
  DirectedGraph graph = build_graph(config.graph, graph_seed_offset);
  WeightMatrix A = pull_matrix(graph);
  WeightMatrix B = push_matrix(graph);
  WeightMatrix W = metropolis_matrix(graph);
  EigenPair pair = perron_vectors(A, B);
  RidgeModel model(config.model);
  Vector x_star = model.optimum();
  return ExperimentSetup{std::move(graph), std::move(A), std::move(B), std::move(W),
                         std::move(pair), std::move(model), std::move(x_star)};
}

namespace {

std::uint32_t algorithm_slot(Algorithm algorithm) {
  return static_cast<std::uint32_t>(algorithm);
}

std::vector<RandomStream> agent_streams(std::uint64_t seed, int rep_id,
                                        Algorithm algorithm, StreamPurpose purpose,
                                        int n) {
  std::vector<RandomStream> streams;
  streams.reserve(n);
  for (int i = 0; i < n; ++i)
    streams.emplace_back(seed, stream_id(static_cast<std::uint32_t>(rep_id),
                                         algorithm_slot(algorithm), purpose,
                                         static_cast<std::uint32_t>(i)));
  return streams;
}

void sample_hessians(const Oracle& model, const AgentMatrix& x,
                     std::span<RandomStream> streams, AgentMatrix& out) {
  const auto n = x.rows();
  const auto d = x.cols();
  out.resize(n, d * d);
  Matrix sample(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Map<const Vector> xi(x.row(i).data(), d);
    model.sample_hessian(static_cast<int>(i), xi, streams[i], sample);
    // row-major flatten
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) out(i, a * d + b) = sample(a, b);
  }
}

CheckpointMetrics measure(const NetworkState& state, const Vector& u,
                          const Vector& x_star) {
  CheckpointMetrics m;
  m.mse = mean_squared_error(state.x, x_star);
  m.weighted_error = (weighted_average(state.x, u) - x_star).squaredNorm();
  m.consensus_error = consensus_error(state.x, u);
  return m;
}

InferenceSnapshot snapshot(const ExperimentConfig& config, const ExperimentSetup& setup,
                           const AveragedIterate& avg, const PlugInEstimator* plugin,
                           long k) {
  InferenceSnapshot snap;
  snap.k = k;
  snap.pr_agent = avg.agent_average(config.tracked_agent);
  snap.pr_network = avg.network_average();
  if (plugin == nullptr) return snap;

  const int n = setup.model.agents();
  const int d = setup.model.dim();
  try {
    std::vector<Matrix> sigmas;
    sigmas.reserve(n);
    snap.sigma_network = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      sigmas.push_back(plugin->covariance(i).Sigma_hat);
      snap.sigma_network += sigmas.back();
    }
    snap.sigma_network /= n;
    snap.sigma_agent = sigmas[config.tracked_agent];
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        snap.max_pairwise_sigma =
            std::max(snap.max_pairwise_sigma, (sigmas[i] - sigmas[j]).norm());
    const double radius = chi2_quantile(config.beta, d) / static_cast<double>(k);
    snap.covered_agent =
        mahalanobis_squared(snap.pr_agent, snap.sigma_agent, setup.x_star) <= radius;
    snap.covered_network =
        mahalanobis_squared(snap.pr_network, snap.sigma_network, setup.x_star) <= radius;
  } catch (const SingularError&) {
    snap.singular = true;
    snap.covered_agent = false;
    snap.covered_network = false;
  }
  return snap;
}

void run_algorithm(const ExperimentConfig& config, const ExperimentSetup& setup,
                   Algorithm algorithm, int rep_id, ReplicationRecord& record) {
  const RidgeModel& model = setup.model;
  const int n = model.agents();
  const int d = model.dim();
  const bool inference = algorithm == Algorithm::SAB && config.tracks_average();
  const bool plugin_on = inference && config.runs_plugin();

  auto grad_streams =
      agent_streams(config.seed, rep_id, algorithm, StreamPurpose::Gradient, n);
  auto hess_streams =
      agent_streams(config.seed, rep_id, algorithm, StreamPurpose::Hessian, n);

  const Vector& u = algorithm == Algorithm::SAB ? setup.pair.u : Vector(Vector::Ones(n));
  AlgorithmTrace trace{algorithm, {}};
  trace.metrics.reserve(record.checkpoints.size());

  NetworkState state = sab_init(model, AgentMatrix::Zero(n, d), grad_streams);
  AveragedIterate avg(n, d, config.burn_in);
  std::optional<PlugInEstimator> plugin;
  AgentMatrix hessians;
  if (plugin_on) {
    plugin.emplace(n, d);
    sample_hessians(model, state.x, hess_streams, hessians);
    plugin->initialize(state.g_prev, hessians);
  }

  std::size_t next = 0;
  auto record_checkpoint = [&]() {
    while (next < record.checkpoints.size() && record.checkpoints[next] == state.k) {
      trace.metrics.push_back(measure(state, u, setup.x_star));
      if (inference && state.k >= 1 && avg.count > 0)
        record.inference.push_back(
            snapshot(config, setup, avg, plugin ? &*plugin : nullptr, state.k));
      ++next;
    }
  };

  record_checkpoint();
  for (long k = 0; k < config.iterations; ++k) {
    if (inference) pr_update(avg, state);
    switch (algorithm) {
      case Algorithm::SAB:
        sab_advance(state, setup.A, setup.B, config.schedule, model, grad_streams);
        break;
      case Algorithm::DSGT:
        dsgt_advance(state, setup.W, config.schedule, model, grad_streams);
        break;
      case Algorithm::DSGD:
        dsgd_advance(state, setup.W, config.schedule, model, grad_streams);
        break;
    }
    if (plugin_on) {
      sample_hessians(model, state.x, hess_streams, hessians);
      plugin->step(setup.A, state.g_prev, hessians);
    }
    record_checkpoint();
  }
  if (plugin) record.floor_hits += plugin->floor_hits();
  record.traces.push_back(std::move(trace));
}

}  // namespace

ReplicationRecord run_replication(const ExperimentConfig& config,
                                  const ExperimentSetup& setup, int rep_id) {
  ReplicationRecord record;
  record.rep_id = rep_id;
  record.checkpoints = config.checkpoints;
  try {
    for (Algorithm algorithm : config.algorithms)
      run_algorithm(config, setup, algorithm, rep_id, record);
  } catch (const DivergenceError& e) {
    record.diverged = true;
    record.failure = e.what();
  }
  return record;
}

ReplicationRecord run_replication(const ExperimentConfig& config, int rep_id) {
  config.validate();
  const std::uint64_t offset =
      config.graph.per_replication ? static_cast<std::uint64_t>(rep_id) : 0;
  return run_replication(config, prepare_setup(config, offset), rep_id);
}

const MetricCurve& EnsembleSummary::curve(Algorithm algorithm,
                                          const std::string& metric) const {
  for (const auto& c : curves)
    if (c.algorithm == algorithm && c.metric == metric) return c;
  throw InvalidArgument("no curve for " + to_string(algorithm) + "/" + metric);
}

std::size_t EnsembleSummary::checkpoint_index(long k) const {
  const auto it = std::find(checkpoints.begin(), checkpoints.end(), k);
  if (it == checkpoints.end())
    throw InvalidArgument("checkpoint " + std::to_string(k) + " not recorded");
  return static_cast<std::size_t>(it - checkpoints.begin());
}

const InferenceSummary& EnsembleSummary::inference_at(long k) const {
  for (const auto& s : inference)
    if (s.k == k) return s;
  throw InvalidArgument("no inference summary at k = " + std::to_string(k));
}

EnsembleSummary summarize(const ExperimentConfig& config,
                          std::span<const ReplicationRecord> records,
                          const Vector& x_star,
                          const std::optional<GroundTruth>& truth) {
  EnsembleSummary summary;
  summary.kind = config.kind;
  summary.replications = static_cast<int>(records.size());
  summary.checkpoints = config.checkpoints;
  summary.truth = truth;
  summary.x_star = x_star;

  std::vector<const ReplicationRecord*> ok;
  for (const auto& r : records) {
    if (r.diverged)
      summary.diverged_ids.push_back(r.rep_id);
    else
      ok.push_back(&r);
    summary.floor_hits += r.floor_hits;
  }
  summary.completed = static_cast<int>(ok.size());
  if (ok.empty()) return summary;

  const std::size_t nk = summary.checkpoints.size();
  const double count = static_cast<double>(ok.size());
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    for (const char* metric : {"mse", "weighted_error", "consensus_error"}) {
      MetricCurve curve{config.algorithms[a], metric, std::vector<double>(nk, 0.0),
                        std::vector<double>(nk, 0.0)};
      for (std::size_t c = 0; c < nk; ++c) {
        double sum = 0.0;
        std::vector<double> values;
        values.reserve(ok.size());
        for (const auto* r : ok) {
          const auto& m = r->traces[a].metrics[c];
          const double v = std::string(metric) == "mse"              ? m.mse
                           : std::string(metric) == "weighted_error" ? m.weighted_error
                                                                     : m.consensus_error;
          values.push_back(v);
          sum += v;
        }
        const double mean = sum / count;
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        curve.mean[c] = mean;
        curve.std_error[c] = ok.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
      }
      summary.curves.push_back(std::move(curve));
    }
  }

  if (!config.tracks_average()) return summary;
  const auto d = x_star.size();
  const std::size_t snaps = ok.front()->inference.size();
  const double sigma_norm = truth ? truth->Sigma.norm() : 0.0;
  for (std::size_t s = 0; s < snaps; ++s) {
    InferenceSummary inf;
    inf.k = ok.front()->inference[s].k;
    inf.evaluated = static_cast<int>(ok.size());
    inf.normality_agent.resize(static_cast<Eigen::Index>(ok.size()), d);
    inf.normality_network.resize(static_cast<Eigen::Index>(ok.size()), d);
    const double root_k = std::sqrt(static_cast<double>(inf.k));
    for (std::size_t r = 0; r < ok.size(); ++r) {
      const auto& snap = ok[r]->inference[s];
      const auto row = static_cast<Eigen::Index>(r);
      inf.normality_agent.row(row) = (root_k * (snap.pr_agent - x_star)).transpose();
      inf.normality_network.row(row) = (root_k * (snap.pr_network - x_star)).transpose();
      inf.covered_agent += snap.covered_agent ? 1 : 0;
      inf.covered_network += snap.covered_network ? 1 : 0;
      if (config.runs_plugin() && truth && !snap.singular) {
        inf.sigma_error_agent += (snap.sigma_agent - truth->Sigma).norm() / sigma_norm;
        inf.sigma_error_network += (snap.sigma_network - truth->Sigma).norm() / sigma_norm;
        inf.max_pairwise_sigma += snap.max_pairwise_sigma / sigma_norm;
      }
    }
    inf.sigma_error_agent /= count;
    inf.sigma_error_network /= count;
    inf.max_pairwise_sigma /= count;
    summary.inference.push_back(std::move(inf));
  }
  return summary;
}

std::vector<ReplicationRecord> run_replications(const ExperimentConfig& config) {
  config.validate();
  const int reps = config.replications;
  std::optional<ExperimentSetup> shared;
  if (!config.graph.per_replication) shared.emplace(prepare_setup(config));

  std::vector<ReplicationRecord> records(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int rep = next.fetch_add(1); rep < reps; rep = next.fetch_add(1)) {
      try {
        if (shared)
          records[rep] = run_replication(config, *shared, rep);
        else
          records[rep] = run_replication(
              config, prepare_setup(config, static_cast<std::uint64_t>(rep)), rep);
      } catch (...) {
        errors[rep] = std::current_exception();
      }
    }
  };
  const int threads = std::min(config.parallelism, reps);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return records;
}

EnsembleSummary run_ensemble(const ExperimentConfig& config) {
  return summarize_ensemble(config, run_replications(config));
}

EnsembleSummary summarize_ensemble(const ExperimentConfig& config,
                                   std::span<const ReplicationRecord> records) {
  const int reps = static_cast<int>(records.size());

  std::optional<GroundTruth> truth;
  const RidgeModel model(config.model);
  if (config.tracks_average())
    truth = ground_truth(model, config.mc_samples, config.truth_seed);

  EnsembleSummary summary = summarize(config, records, model.optimum(), truth);
  if (summary.completed == 0)
    throw Error("all " + std::to_string(reps) + " replications diverged");
  return summary;
}

double loglog_slope(std::span<const std::pair<double, double>> trajectory,
                    double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw InvalidArgument("loglog_slope: tail_fraction must lie in (0, 1]");
  const auto total = trajectory.size();
  const auto tail = static_cast<std::size_t>(
      std::ceil(tail_fraction * static_cast<double>(total)));
  if (tail < 10) throw InvalidArgument("loglog_slope: need >= 10 tail points");
  const auto begin = total - tail;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = begin; i < total; ++i) {
    const auto [k, value] = trajectory[i];
    if (!(value > 0.0) || !(k > 0.0))
      throw InvalidArgument("loglog_slope: nonpositive value in tail");
    const double lx = std::log(k);
    const double ly = std::log(value);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(tail);
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace sab
