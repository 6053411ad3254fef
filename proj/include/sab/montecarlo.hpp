#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sab/algorithms.hpp"
#include "sab/graph.hpp"
#include "sab/oracle.hpp"
#include "sab/weights.hpp"

namespace sab {

enum class Algorithm { SAB, DSGT, DSGD };
enum class ExperimentKind { Rate, Normality, Coverage };

std::string to_string(Algorithm algorithm);
std::string to_string(ExperimentKind kind);
Algorithm parse_algorithm(const std::string& name);
ExperimentKind parse_experiment_kind(const std::string& name);

struct GraphConfig {
  std::string kind = "ring_plus_random";  // ring_plus_random | ring | complete | empty
  int n = 20;
  double p = 0.3;
  std::uint64_t seed = 7;
  /// Draw a fresh topology per replication (seed + rep_id) instead of once.
  bool per_replication = false;
};

DirectedGraph build_graph(const GraphConfig& config, std::uint64_t seed_offset = 0);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Rate;
  GraphConfig graph;
  RidgeConfig model;
  StepSchedule schedule;
  long iterations = 5000;
  int replications = 50;
  /// Sorted, unique, within [0, iterations].
  std::vector<long> checkpoints;
  std::vector<Algorithm> algorithms{Algorithm::SAB, Algorithm::DSGT, Algorithm::DSGD};
  std::uint64_t seed = 2023;
  int parallelism = 1;
  double beta = 0.05;
  long burn_in = 0;
  int tracked_agent = 0;
  std::int64_t mc_samples = 1000000;
  std::uint64_t truth_seed = 99;

  /// Paper-scale defaults for each experiment.
  static ExperimentConfig paper(ExperimentKind kind);

  bool tracks_average() const { return kind != ExperimentKind::Rate; }
  bool runs_plugin() const { return kind == ExperimentKind::Coverage; }
  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Everything shared read-only by the replications of one ensemble.
struct ExperimentSetup {
  DirectedGraph graph;
  WeightMatrix A;
  WeightMatrix B;
  WeightMatrix W;
  EigenPair pair;
  RidgeModel model;
  Vector x_star;
};

ExperimentSetup prepare_setup(const ExperimentConfig& config,
                              std::uint64_t graph_seed_offset = 0);

struct CheckpointMetrics {
  double mse = 0.0;              // (1/n) sum_i ||x_i - x*||^2
  double weighted_error = 0.0;   // ||xbar - x*||^2, u-weighted xbar
  double consensus_error = 0.0;  // ||x - 1 xbar||^2
};

struct AlgorithmTrace {
  Algorithm algorithm;
  std::vector<CheckpointMetrics> metrics;  // aligned with record checkpoints
};

/// Polyak-Ruppert averages, plug-in covariances and region hits for one
/// checkpoint of the S-AB run.
struct InferenceSnapshot {
  long k = 0;
  Vector pr_agent;    // tracked agent's running average
  Vector pr_network;  // across-agent mean of running averages
  Matrix sigma_agent;
  Matrix sigma_network;  // across-agent mean of plug-in covariances
  double max_pairwise_sigma = 0.0;  // max_{i,j} ||Sigma_i - Sigma_j||_F
  bool covered_agent = false;
  bool covered_network = false;
  bool singular = false;
};

struct ReplicationRecord {
  int rep_id = 0;
  bool diverged = false;
  std::string failure;
  std::vector<long> checkpoints;
  std::vector<AlgorithmTrace> traces;
  std::vector<InferenceSnapshot> inference;  // checkpoints with k >= 1
  long floor_hits = 0;
};

ReplicationRecord run_replication(const ExperimentConfig& config,
                                  const ExperimentSetup& setup, int rep_id);
ReplicationRecord run_replication(const ExperimentConfig& config, int rep_id);

struct MetricCurve {
  Algorithm algorithm;
  std::string metric;  // mse | weighted_error | consensus_error
  std::vector<double> mean;
  std::vector<double> std_error;
};

struct InferenceSummary {
  long k = 0;
  int evaluated = 0;
  int covered_agent = 0;
  int covered_network = 0;
  /// Rows: replications; columns: components of sqrt(k)(average - x*).
  Matrix normality_agent;
  Matrix normality_network;
  /// Means over replications; present when the plug-in ran.
  double sigma_error_agent = 0.0;    // ||Sigma_agent - Sigma||_F / ||Sigma||_F
  double sigma_error_network = 0.0;
  double max_pairwise_sigma = 0.0;   // relative to ||Sigma||_F
};

struct EnsembleSummary {
  ExperimentKind kind = ExperimentKind::Rate;
  int replications = 0;
  int completed = 0;
  std::vector<int> diverged_ids;
  std::vector<long> checkpoints;
  std::vector<MetricCurve> curves;
  std::vector<InferenceSummary> inference;
  std::optional<GroundTruth> truth;
  Vector x_star;
  long floor_hits = 0;

  const MetricCurve& curve(Algorithm algorithm, const std::string& metric) const;
  /// Index of checkpoint k; throws if absent.
  std::size_t checkpoint_index(long k) const;
  const InferenceSummary& inference_at(long k) const;
};

/// Runs every replication, parallel up to config.parallelism; output is in
/// rep_id order.
std::vector<ReplicationRecord> run_replications(const ExperimentConfig& config);

/// Runs all replications (parallel up to config.parallelism) and reduces
/// them in rep_id order; the result does not depend on the parallelism.
EnsembleSummary run_ensemble(const ExperimentConfig& config);

/// Computes the ground truth when the experiment needs it, then reduces.
/// Throws Error when every replication diverged.
EnsembleSummary summarize_ensemble(const ExperimentConfig& config,
                                   std::span<const ReplicationRecord> records);

/// Reduces records in the given order.
EnsembleSummary summarize(const ExperimentConfig& config,
                          std::span<const ReplicationRecord> records,
                          const Vector& x_star,
                          const std::optional<GroundTruth>& truth);

/// Least-squares slope of log(value) on log(k) over the last
/// `tail_fraction` of the points.
double loglog_slope(std::span<const std::pair<double, double>> trajectory,
                    double tail_fraction);

}  // namespace sab
