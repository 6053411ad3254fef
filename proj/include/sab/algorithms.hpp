#pragma once

#include <span>
#include <string>
#include <vector>

#include "sab/linalg.hpp"
#include "sab/oracle.hpp"
#include "sab/rng.hpp"
#include "sab/weights.hpp"

namespace sab {

/// Iterate of a gradient-tracking network after k steps.
///   x      - decision vectors, one row per agent
///   y      - gradient trackers (unused by DSGD)
///   g_prev - gradient samples drawn at x
struct NetworkState {
  long k = 0;
  AgentMatrix x;
  AgentMatrix y;
  AgentMatrix g_prev;
};

/// alpha_k = a / (k + b)^alpha. `alpha = 0` gives the constant step a.
struct StepSchedule {
  double a = 0.05;
  double b = 1.0;
  double alpha = 0.6;

  StepSchedule() = default;
  StepSchedule(double a, double b, double alpha);
  static StepSchedule constant(double step) { return StepSchedule(step, 1.0, 0.0); }

  double at(long k) const;
};

double step_size(const StepSchedule& schedule, long k);

struct ScheduleReport {
  double initial_step = 0.0;     // a / b^alpha
  double step_bound = 0.0;       // min{1, n / (u^T v L)}
  bool step_bound_ok = false;
  bool exponent_ok = false;      // alpha in (1/2, 1]
  bool rate_condition_applies = false;  // alpha == 1
  double rate_threshold = 0.0;   // n^2 / (u^T v mu)
  bool rate_condition_ok = true;
  std::vector<std::string> warnings;

  bool valid() const { return step_bound_ok && exponent_ok && rate_condition_ok; }
};

/// Checks the step-size conditions for the O(alpha_k) and O(1/k) rates.
/// Never throws for a bad schedule; problems are listed as warnings.
ScheduleReport validate_schedule(const StepSchedule& schedule,
                                 const EigenPair& pair, double L, double mu,
                                 int n);

/// x = x0, y = g_prev = fresh gradient samples at x0, k = 0.
NetworkState sab_init(const Oracle& model, const AgentMatrix& x0,
                      std::span<RandomStream> streams);

/// One push-pull step in place:
///   x <- A x - alpha_k y
///   g <- fresh samples at the new x
///   y <- (B y - g_prev) + g
/// Throws DivergenceError if any entry of x or y stops being finite.
void sab_advance(NetworkState& state, const WeightMatrix& A,
                 const WeightMatrix& B, const StepSchedule& schedule,
                 const Oracle& model, std::span<RandomStream> streams);

NetworkState sab_step(NetworkState state, const WeightMatrix& A,
                      const WeightMatrix& B, const StepSchedule& schedule,
                      const Oracle& model, std::span<RandomStream> streams);

/// Gradient tracking with one doubly stochastic matrix: sab with A = B = W.
void dsgt_advance(NetworkState& state, const WeightMatrix& W,
                  const StepSchedule& schedule, const Oracle& model,
                  std::span<RandomStream> streams);
NetworkState dsgt_step(NetworkState state, const WeightMatrix& W,
                       const StepSchedule& schedule, const Oracle& model,
                       std::span<RandomStream> streams);

/// x <- W x - alpha_k g_prev, then g_prev <- fresh samples at x. y untouched.
void dsgd_advance(NetworkState& state, const WeightMatrix& W,
                  const StepSchedule& schedule, const Oracle& model,
                  std::span<RandomStream> streams);
NetworkState dsgd_step(NetworkState state, const WeightMatrix& W,
                       const StepSchedule& schedule, const Oracle& model,
                       std::span<RandomStream> streams);

/// Draws grad g_i(x_i) for every agent into `out`.
void sample_gradients(const Oracle& model, const AgentMatrix& x,
                      std::span<RandomStream> streams, AgentMatrix& out);

/// Running Polyak-Ruppert sum of x_t for t >= burn_in.
struct AveragedIterate {
  AgentMatrix sum;
  long count = 0;
  long burn_in = 0;

  AveragedIterate() = default;
  AveragedIterate(int n, int d, long burn_in = 0);

  AgentMatrix average() const;
  Vector agent_average(int i) const;
  /// Mean over agents of the per-agent averages.
  Vector network_average() const;
};

/// Adds state.x to the running sum when state.k >= burn_in.
void pr_update(AveragedIterate& avg, const NetworkState& state);

/// (u^T / n) x: the u-weighted network average.
Vector weighted_average(const AgentMatrix& x, const Vector& u);
/// (1/n) sum_i ||x_i - x*||^2
double mean_squared_error(const AgentMatrix& x, const Vector& x_star);
/// ||x - 1 xbar^T||_F^2 with xbar the u-weighted average.
double consensus_error(const AgentMatrix& x, const Vector& u);

}  // namespace sab
