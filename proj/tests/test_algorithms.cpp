#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "sab/algorithms.hpp"
#include "sab/errors.hpp"
#include "sab/graph.hpp"
#include "sab/oracle.hpp"
#include "sab/weights.hpp"

using namespace sab;

namespace {

std::vector<RandomStream> make_streams(int n, std::uint64_t seed) {
  std::vector<RandomStream> streams;
  for (int i = 0; i < n; ++i)
    streams.emplace_back(seed, stream_id(0, 0, StreamPurpose::Gradient, i));
  return streams;
}

QuadraticModel ring_quadratic(int n, int d, bool noisy) {
  std::vector<Matrix> Q;
  std::vector<Vector> c;
  for (int i = 0; i < n; ++i) {
    Matrix q = Matrix::Identity(d, d) * (1.0 + 0.5 * i);
    q(0, d - 1) = q(d - 1, 0) = 0.2;
    Q.push_back(q);
    c.push_back(Vector::LinSpaced(d, static_cast<double>(i), 2.0 * i - 1.0));
  }
  return QuadraticModel(Q, c, noisy ? Matrix(Matrix::Identity(d, d)) : Matrix(Matrix::Zero(d, d)));
}

class ZeroOracle final : public Oracle {
 public:
  ZeroOracle(int n, int d) : n_(n), d_(d) {}
  int agents() const override { return n_; }
  int dim() const override { return d_; }
  void sample_gradient(int, const Eigen::Ref<const Vector>&, RandomStream&,
                       Eigen::Ref<Vector> out) const override {
    out.setZero();
  }
  void sample_hessian(int, const Eigen::Ref<const Vector>&, RandomStream&,
                      Eigen::Ref<Matrix> out) const override {
    out.setZero();
  }
  Vector expected_gradient(int, const Vector&) const override { return Vector::Zero(d_); }
  Matrix expected_hessian(int, const Vector&) const override { return Matrix::Zero(d_, d_); }
  Vector optimum() const override { return Vector::Zero(d_); }
  double lipschitz() const override { return 0.0; }
  double strong_convexity() const override { return 0.0; }

 private:
  int n_, d_;
};

bool bitwise_equal(const AgentMatrix& a, const AgentMatrix& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("step sizes") {
  CHECK(step_size(StepSchedule(0.05, 1.0, 0.6), 0) == 0.05);
  CHECK(step_size(StepSchedule(1.0, 1.0, 1.0), 0) == 1.0);
  CHECK(step_size(StepSchedule(0.05, 1.0, 0.6), 999) ==
        doctest::Approx(7.924e-4).epsilon(1e-3));
  CHECK(StepSchedule::constant(0.3).at(1000) == 0.3);
  const StepSchedule s(0.05, 1.0, 0.6);
  for (long k = 0; k < 1000; ++k) CHECK(s.at(k + 1) < s.at(k));
  CHECK_THROWS_AS(StepSchedule(0.0, 1.0, 0.6), InvalidArgument);
  CHECK_THROWS_AS(StepSchedule(1.0, 0.0, 0.6), InvalidArgument);
  CHECK_THROWS_AS(StepSchedule(1.0, 1.0, 1.5), InvalidArgument);
}

TEST_CASE("schedule validation") {
  const EigenPair ones{Vector::Ones(20), Vector::Ones(20), 20.0};
  const auto ok = validate_schedule(StepSchedule(0.05, 1.0, 0.6), ones, 1.0, 1.0, 20);
  CHECK(ok.initial_step == 0.05);
  CHECK(ok.step_bound == 1.0);
  CHECK(ok.valid());
  CHECK(ok.warnings.empty());

  const auto big = validate_schedule(StepSchedule(2.0, 1.0, 0.6), ones, 1.0, 1.0, 20);
  CHECK_FALSE(big.step_bound_ok);
  CHECK_FALSE(big.valid());
  CHECK_FALSE(big.warnings.empty());

  const auto slow = validate_schedule(StepSchedule(0.5, 20.0, 1.0), ones, 1.0, 40.0, 20);
  CHECK(slow.rate_condition_applies);
  CHECK(slow.rate_threshold == doctest::Approx(0.5));
  CHECK_FALSE(slow.rate_condition_ok);
  CHECK_FALSE(slow.warnings.empty());

  const auto flat = validate_schedule(StepSchedule(0.05, 1.0, 0.4), ones, 1.0, 1.0, 20);
  CHECK_FALSE(flat.exponent_ok);
}

TEST_CASE("tracking conservation on the ridge problem") {
  const auto g = ring_plus_random(20, 0.3, 7);
  const auto A = pull_matrix(g);
  const auto B = push_matrix(g);
  const RidgeModel model(paper_ridge_config());
  const StepSchedule schedule(0.05, 1.0, 0.6);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto streams = make_streams(20, seed);
    NetworkState state = sab_init(model, AgentMatrix::Zero(20, 3), streams);
    CHECK(state.y == state.g_prev);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      sab_advance(state, A, B, schedule, model, streams);
      const Vector gap = state.y.colwise().sum() - state.g_prev.colwise().sum();
      worst = std::max(worst, gap.cwiseAbs().maxCoeff());
    }
    CHECK(state.k == 1000);
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("single agent push-pull is SGD bitwise") {
  RidgeConfig c = paper_ridge_config();
  c.n = 1;
  const RidgeModel model(c);
  const WeightMatrix I(Matrix::Identity(1, 1), Stochasticity::Doubly);
  const StepSchedule schedule(0.05, 1.0, 0.6);
  auto streams = make_streams(1, 42);
  NetworkState state = sab_init(model, AgentMatrix::Zero(1, 3), streams);

  RandomStream ref_stream(42, stream_id(0, 0, StreamPurpose::Gradient, 0));
  Vector x = Vector::Zero(3);
  Vector g = model.sample_gradient(0, x, ref_stream);
  for (long k = 0; k < 1000; ++k) {
    sab_advance(state, I, I, schedule, model, streams);
    x = x - schedule.at(k) * g;
    g = model.sample_gradient(0, x, ref_stream);
    REQUIRE(std::memcmp(state.x.data(), x.data(), 3 * sizeof(double)) == 0);
    REQUIRE(std::memcmp(state.y.data(), g.data(), 3 * sizeof(double)) == 0);
  }

  // The baselines reduce to the same recursion.
  auto s2 = make_streams(1, 42);
  auto s3 = make_streams(1, 42);
  NetworkState tracked = sab_init(model, AgentMatrix::Zero(1, 3), s2);
  NetworkState plain = sab_init(model, AgentMatrix::Zero(1, 3), s3);
  for (long k = 0; k < 1000; ++k) {
    dsgt_advance(tracked, I, schedule, model, s2);
    dsgd_advance(plain, I, schedule, model, s3);
  }
  CHECK(std::memcmp(tracked.x.data(), x.data(), 3 * sizeof(double)) == 0);
  CHECK(std::memcmp(plain.x.data(), x.data(), 3 * sizeof(double)) == 0);
}

TEST_CASE("dsgt equals push-pull with A = B = W") {
  const auto W = metropolis_matrix(ring_plus_random(20, 0.3, 7));
  const RidgeModel model(paper_ridge_config());
  const StepSchedule schedule(0.05, 1.0, 0.6);
  auto sa = make_streams(20, 5);
  auto sb = make_streams(20, 5);
  NetworkState a = sab_init(model, AgentMatrix::Zero(20, 3), sa);
  NetworkState b = sab_init(model, AgentMatrix::Zero(20, 3), sb);
  for (int k = 0; k < 300; ++k) {
    a = sab_step(std::move(a), W, W, schedule, model, sa);
    b = dsgt_step(std::move(b), W, schedule, model, sb);
  }
  CHECK(bitwise_equal(a.x, b.x));
  CHECK(bitwise_equal(a.y, b.y));
  CHECK_THROWS_AS(dsgt_advance(a, pull_matrix(ring_plus_random(20, 0.3, 7)), schedule,
                               model, sa),
                  InvalidArgument);
}

TEST_CASE("init at the optimum keeps per-agent gradients") {
  const auto model = ring_quadratic(4, 2, false);
  AgentMatrix x0(4, 2);
  for (int i = 0; i < 4; ++i) x0.row(i) = model.optimum().transpose();
  auto streams = make_streams(4, 1);
  const NetworkState s = sab_init(model, x0, streams);
  CHECK(s.y.norm() > 1e-3);
  CHECK(s.y.colwise().sum().norm() < 1e-12);
}

TEST_CASE("zero gradients: pure consensus contracts at the diagnostic rate") {
  const auto g = ring_plus_random(20, 0.3, 7);
  const auto A = pull_matrix(g);
  const auto B = push_matrix(g);
  const EigenPair pair = perron_vectors(A, B);
  const double rho = contraction_diagnostic(A, pair);
  const ZeroOracle oracle(20, 2);
  auto streams = make_streams(20, 1);
  AgentMatrix x0(20, 2);
  for (int i = 0; i < 20; ++i) x0.row(i) << std::sin(i + 0.3), std::cos(2.0 * i);
  NetworkState state = sab_init(oracle, x0, streams);
  const Vector xbar0 = weighted_average(state.x, pair.u);
  std::vector<double> gaps{std::sqrt(consensus_error(state.x, pair.u))};
  for (int k = 0; k < 100; ++k) {
    sab_advance(state, A, B, StepSchedule(0.05, 1.0, 0.6), oracle, streams);
    CHECK(state.y.isZero(0.0));
    gaps.push_back(std::sqrt(consensus_error(state.x, pair.u)));
  }
  // The u-weighted average is invariant under row-stochastic mixing.
  CHECK((weighted_average(state.x, pair.u) - xbar0).norm() < 1e-12);
  // Per-step rate from step 10 until the gap reaches round-off.
  std::size_t last = 10;
  while (last + 1 < gaps.size() && gaps[last + 1] > 1e-11 * gaps[0]) ++last;
  REQUIRE(last > 20);
  const double empirical = std::pow(gaps[last] / gaps[10], 1.0 / static_cast<double>(last - 10));
  CHECK(empirical < 1.0);
  CHECK(std::abs(empirical - rho) < 0.05);
}

TEST_CASE("noiseless push-pull converges linearly on a 4-ring") {
  const auto ring = ring_graph(4);
  const auto A = pull_matrix(ring);
  const auto B = push_matrix(ring);
  const auto model = ring_quadratic(4, 3, false);
  const Vector x_star = model.optimum();
  auto streams = make_streams(4, 1);
  NetworkState state = sab_init(model, AgentMatrix::Zero(4, 3), streams);
  std::vector<double> err;
  for (int k = 0; k < 2000; ++k) {
    sab_advance(state, A, B, StepSchedule::constant(0.01), model, streams);
    if ((k + 1) % 200 == 0) err.push_back(std::sqrt(4.0 * mean_squared_error(state.x, x_star)));
  }
  CHECK(err.back() < 1e-6);
  for (std::size_t i = 1; i < err.size(); ++i) CHECK(err[i] < err[i - 1]);
}

TEST_CASE("dsgd with identical starts and no noise keeps agents identical") {
  const auto W = metropolis_matrix(ring_plus_random(6, 0.3, 2));
  std::vector<Matrix> Q(6, Matrix::Identity(2, 2));
  std::vector<Vector> c(6, Vector::Ones(2));
  const QuadraticModel same(Q, c, Matrix::Zero(2, 2));
  auto streams = make_streams(6, 1);
  NetworkState state = sab_init(same, AgentMatrix::Constant(6, 2, 3.0), streams);
  for (int k = 0; k < 50; ++k) dsgd_advance(state, W, StepSchedule(0.1, 1.0, 0.6), same, streams);
  for (int i = 1; i < 6; ++i) CHECK((state.x.row(i) - state.x.row(0)).norm() < 1e-14);
}

TEST_CASE("divergence is reported with the iteration") {
  const auto g = ring_graph(4);
  const auto model = ring_quadratic(4, 2, false);
  auto streams = make_streams(4, 1);
  NetworkState state = sab_init(model, AgentMatrix::Ones(4, 2), streams);
  bool thrown = false;
  try {
    for (int k = 0; k < 5000; ++k)
      sab_advance(state, pull_matrix(g), push_matrix(g), StepSchedule::constant(5.0), model,
                  streams);
  } catch (const DivergenceError& e) {
    thrown = true;
    CHECK(e.iteration() > 0);
  }
  CHECK(thrown);
}

TEST_CASE("polyak-ruppert averaging") {
  AveragedIterate avg(2, 1);
  NetworkState s;
  s.x = AgentMatrix::Zero(2, 1);
  pr_update(avg, s);
  s.x.setConstant(2.0);
  s.k = 1;
  pr_update(avg, s);
  CHECK(avg.count == 2);
  CHECK(avg.agent_average(0)(0) == 1.0);
  CHECK(avg.network_average()(0) == 1.0);

  AveragedIterate late(1, 2, 3);
  NetworkState c;
  c.x = AgentMatrix::Constant(1, 2, 5.0);
  for (long k = 0; k < 10; ++k) {
    c.k = k;
    pr_update(late, c);
  }
  CHECK(late.count == 7);
  CHECK(late.agent_average(0) == Vector::Constant(2, 5.0));
}

TEST_CASE("weighted metrics") {
  AgentMatrix x(2, 1);
  x << 1.0, 3.0;
  const Vector u = (Vector(2) << 1.5, 0.5).finished();
  CHECK(weighted_average(x, u)(0) == doctest::Approx(1.5));
  CHECK(mean_squared_error(x, Vector::Zero(1)) == doctest::Approx(5.0));
  CHECK(consensus_error(x, u) == doctest::Approx(0.25 + 2.25));
}

TEST_CASE("discounted step-size sums stay proportional to the step") {
  const StepSchedule s(0.05, 1.0, 0.6);
  for (double tau : {0.5, 0.9}) {
    double acc = 0.0, worst = 0.0;
    for (long k = 1; k <= 100000; ++k) {
      acc = tau * (acc + s.at(k - 1));
      worst = std::max(worst, acc / s.at(k));
    }
    CHECK(worst < 100.0);
  }
}
