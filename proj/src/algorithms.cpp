#include "sab/algorithms.hpp"

#include <cmath>
#include <sstream>

#include "sab/errors.hpp"

namespace sab {

StepSchedule::StepSchedule(double a_, double b_, double alpha_)
    : a(a_), b(b_), alpha(alpha_) {
  if (!(a > 0.0)) throw InvalidArgument("step schedule: a must be > 0");
  if (!(b > 0.0)) throw InvalidArgument("step schedule: b must be > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("step schedule: alpha must lie in [0, 1]");
}

double StepSchedule::at(long k) const {
  if (alpha == 0.0) return a;
  return a / std::pow(static_cast<double>(k) + b, alpha);
}

double step_size(const StepSchedule& schedule, long k) { return schedule.at(k); }

ScheduleReport validate_schedule(const StepSchedule& schedule,
                                 const EigenPair& pair, double L, double mu,
                                 int n) {
  ScheduleReport report;
  report.initial_step = schedule.a / std::pow(schedule.b, schedule.alpha);
  report.step_bound = std::min(1.0, n / (pair.uv * L));
  report.step_bound_ok = report.initial_step <= report.step_bound;
  report.exponent_ok = schedule.alpha > 0.5 && schedule.alpha <= 1.0;
  report.rate_condition_applies = schedule.alpha == 1.0;
  report.rate_threshold = static_cast<double>(n) * n / (pair.uv * mu);
  if (report.rate_condition_applies)
    report.rate_condition_ok = report.rate_threshold < schedule.a;

  if (!report.step_bound_ok) {
    std::ostringstream msg;
    msg << "initial step a/b^alpha = " << report.initial_step
        << " exceeds min{1, n/(u^T v L)} = " << report.step_bound;
    report.warnings.push_back(msg.str());
  }
  if (!report.exponent_ok) {
    std::ostringstream msg;
    msg << "exponent alpha = " << schedule.alpha << " outside (1/2, 1]";
    report.warnings.push_back(msg.str());
  }
  if (!report.rate_condition_ok) {
    std::ostringstream msg;
    msg << "rate condition unmet: a = " << schedule.a
        << " must exceed n^2/(u^T v mu) = " << report.rate_threshold
        << " for the O(1/k) rate";
    report.warnings.push_back(msg.str());
  }
  return report;
}

void sample_gradients(const Oracle& model, const AgentMatrix& x,
                      std::span<RandomStream> streams, AgentMatrix& out) {
  const auto n = x.rows();
  const auto d = x.cols();
  out.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Map<const Vector> xi(x.row(i).data(), d);
    Eigen::Map<Vector> gi(out.row(i).data(), d);
    model.sample_gradient(static_cast<int>(i), xi, streams[i], gi);
  }
}

namespace {

void check_dimensions(const NetworkState& state, const Oracle& model,
                      std::size_t streams) {
  if (state.x.rows() != model.agents() || state.x.cols() != model.dim())
    throw DimensionError("state does not match oracle dimensions");
  if (streams < static_cast<std::size_t>(model.agents()))
    throw DimensionError("need one random stream per agent");
}

void check_finite(const NetworkState& state) {
  if (!state.x.allFinite() || !state.y.allFinite() || !state.g_prev.allFinite())
    throw DivergenceError(
        "non-finite iterate at iteration " + std::to_string(state.k), state.k);
}

}  // namespace

NetworkState sab_init(const Oracle& model, const AgentMatrix& x0,
                      std::span<RandomStream> streams) {
  if (x0.rows() != model.agents() || x0.cols() != model.dim())
    throw DimensionError("sab_init: x0 must be n x d");
  if (streams.size() < static_cast<std::size_t>(model.agents()))
    throw DimensionError("sab_init: need one random stream per agent");
  NetworkState state;
  state.x = x0;
  sample_gradients(model, state.x, streams, state.g_prev);
  state.y = state.g_prev;
  return state;
}

void sab_advance(NetworkState& state, const WeightMatrix& A,
                 const WeightMatrix& B, const StepSchedule& schedule,
                 const Oracle& model, std::span<RandomStream> streams) {
  check_dimensions(state, model, streams.size());
  if (A.size() != model.agents() || B.size() != model.agents())
    throw DimensionError("sab_step: weight matrices must be n x n");
  const double step = schedule.at(state.k);
  state.x = A.matrix() * state.x - step * state.y;
  AgentMatrix fresh;
  sample_gradients(model, state.x, streams, fresh);
  // (B y - g_prev) + g keeps y == g bitwise when B = [1].
  state.y = (B.matrix() * state.y - state.g_prev) + fresh;
  state.g_prev.swap(fresh);
  ++state.k;
  check_finite(state);
}

NetworkState sab_step(NetworkState state, const WeightMatrix& A,
                      const WeightMatrix& B, const StepSchedule& schedule,
                      const Oracle& model, std::span<RandomStream> streams) {
  sab_advance(state, A, B, schedule, model, streams);
  return state;
}

void dsgt_advance(NetworkState& state, const WeightMatrix& W,
                  const StepSchedule& schedule, const Oracle& model,
                  std::span<RandomStream> streams) {
  if (W.kind() != Stochasticity::Doubly)
    throw InvalidArgument("dsgt_step: W must be doubly stochastic");
  sab_advance(state, W, W, schedule, model, streams);
}

NetworkState dsgt_step(NetworkState state, const WeightMatrix& W,
                       const StepSchedule& schedule, const Oracle& model,
                       std::span<RandomStream> streams) {
  dsgt_advance(state, W, schedule, model, streams);
  return state;
}

void dsgd_advance(NetworkState& state, const WeightMatrix& W,
                  const StepSchedule& schedule, const Oracle& model,
                  std::span<RandomStream> streams) {
  if (W.kind() != Stochasticity::Doubly)
    throw InvalidArgument("dsgd_step: W must be doubly stochastic");
  check_dimensions(state, model, streams.size());
  if (W.size() != model.agents())
    throw DimensionError("dsgd_step: W must be n x n");
  const double step = schedule.at(state.k);
  state.x = W.matrix() * state.x - step * state.g_prev;
  sample_gradients(model, state.x, streams, state.g_prev);
  ++state.k;
  check_finite(state);
}

NetworkState dsgd_step(NetworkState state, const WeightMatrix& W,
                       const StepSchedule& schedule, const Oracle& model,
                       std::span<RandomStream> streams) {
  dsgd_advance(state, W, schedule, model, streams);
  return state;
}

AveragedIterate::AveragedIterate(int n, int d, long burn_in_)
    : sum(AgentMatrix::Zero(n, d)), count(0), burn_in(burn_in_) {}

AgentMatrix AveragedIterate::average() const {
  if (count == 0) throw InvalidArgument("averaged iterate: no iterates accumulated");
  return sum / static_cast<double>(count);
}

Vector AveragedIterate::agent_average(int i) const {
  if (count == 0) throw InvalidArgument("averaged iterate: no iterates accumulated");
  return sum.row(i).transpose() / static_cast<double>(count);
}

Vector AveragedIterate::network_average() const {
  if (count == 0) throw InvalidArgument("averaged iterate: no iterates accumulated");
  return sum.colwise().mean().transpose() / static_cast<double>(count);
}

void pr_update(AveragedIterate& avg, const NetworkState& state) {
  if (state.k < avg.burn_in) return;
  if (avg.sum.size() == 0) avg.sum = AgentMatrix::Zero(state.x.rows(), state.x.cols());
  avg.sum += state.x;
  ++avg.count;
}

Vector weighted_average(const AgentMatrix& x, const Vector& u) {
  return (u.transpose() * x).transpose() / static_cast<double>(x.rows());
}

double mean_squared_error(const AgentMatrix& x, const Vector& x_star) {
  return (x.rowwise() - x_star.transpose()).rowwise().squaredNorm().mean();
}

double consensus_error(const AgentMatrix& x, const Vector& u) {
  const Vector xbar = weighted_average(x, u);
  return (x.rowwise() - xbar.transpose()).squaredNorm();
}

}  // namespace sab
