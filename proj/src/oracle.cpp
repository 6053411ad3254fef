#include "sab/oracle.hpp"

#include <cmath>
#include <string>

#include "sab/errors.hpp"

namespace sab {

Vector Oracle::sample_gradient(int i, const Vector& x, RandomStream& rng) const {
  Vector out(dim());
  sample_gradient(i, x, rng, out);
  return out;
}

Matrix Oracle::sample_hessian(int i, const Vector& x, RandomStream& rng) const {
  Matrix out(dim(), dim());
  sample_hessian(i, x, rng, out);
  return out;
}

namespace {

// E[w^k] for w ~ Uniform[low, high].
double uniform_moment(double low, double high, int k) {
  if (high == low) return std::pow(low, k);
  return (std::pow(high, k + 1) - std::pow(low, k + 1)) /
         ((k + 1) * (high - low));
}

double min_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

RidgeConfig paper_ridge_config() { return RidgeConfig{}; }

RidgeModel::RidgeModel(RidgeConfig config) : config_(std::move(config)) {
  const int n = config_.n;
  const int d = config_.d;
  if (n < 1 || d < 1) throw InvalidArgument("ridge: n and d must be >= 1");
  if (!(config_.gamma >= 0.0)) throw InvalidArgument("ridge: gamma must be >= 0");
  if (!(config_.w_high >= config_.w_low))
    throw InvalidArgument("ridge: w_high must be >= w_low");
  if (!(config_.noise_sd >= 0.0))
    throw InvalidArgument("ridge: noise_sd must be >= 0");

  if (config_.placement == TargetPlacement::Diagonal) {
    xtilde_.reserve(n);
    for (int i = 0; i < n; ++i) {
      const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
      const double level =
          config_.xtilde_low + (config_.xtilde_high - config_.xtilde_low) * t;
      xtilde_.push_back(Vector::Constant(d, level));
    }
  } else {
    if (static_cast<int>(config_.xtilde.size()) != n)
      throw DimensionError("ridge: explicit xtilde needs n vectors");
    for (const auto& x : config_.xtilde)
      if (x.size() != d) throw DimensionError("ridge: xtilde vector has wrong d");
    xtilde_ = config_.xtilde;
  }

  const double m1 = uniform_moment(config_.w_low, config_.w_high, 1);
  const double m2 = uniform_moment(config_.w_low, config_.w_high, 2);
  second_moment_ = Matrix::Constant(d, d, m1 * m1);
  second_moment_.diagonal().setConstant(m2);
}

void RidgeModel::sample_gradient(int i, const Eigen::Ref<const Vector>& x,
                                 RandomStream& rng,
                                 Eigen::Ref<Vector> out) const {
  const double span = config_.w_high - config_.w_low;
  for (int c = 0; c < config_.d; ++c) out(c) = config_.w_low + span * rng.uniform();
  const double noise = config_.noise_sd * rng.normal();
  const double observed = out.dot(xtilde_[i]) + noise;
  const double residual = out.dot(x) - observed;
  out = 2.0 * residual * out + 2.0 * config_.gamma * x;
}

void RidgeModel::sample_hessian(int /*i*/, const Eigen::Ref<const Vector>& /*x*/,
                                RandomStream& rng, Eigen::Ref<Matrix> out) const {
  const double span = config_.w_high - config_.w_low;
  Vector w(config_.d);
  for (int c = 0; c < config_.d; ++c) w(c) = config_.w_low + span * rng.uniform();
  out.noalias() = 2.0 * w * w.transpose();
  out.diagonal().array() += 2.0 * config_.gamma;
}

Vector RidgeModel::expected_gradient(int i, const Vector& x) const {
  return 2.0 * second_moment_ * (x - xtilde_[i]) + 2.0 * config_.gamma * x;
}

Matrix RidgeModel::expected_hessian(int /*i*/, const Vector& /*x*/) const {
  return 2.0 * second_moment_ +
         2.0 * config_.gamma * Matrix::Identity(config_.d, config_.d);
}

Vector RidgeModel::optimum() const {
  const int d = config_.d;
  Matrix lhs = config_.n * second_moment_ +
               config_.n * config_.gamma * Matrix::Identity(d, d);
  Vector rhs = Vector::Zero(d);
  for (const auto& target : xtilde_) rhs += second_moment_ * target;
  Eigen::LLT<Matrix> llt(lhs);
  if (llt.info() != Eigen::Success)
    throw SingularError("ridge: objective is not strongly convex", condition_number(lhs));
  return llt.solve(rhs);
}

double RidgeModel::lipschitz() const {
  // L_i(zeta) = lambda_max(2 w w^T + 2 gamma I) = 2 ||w||^2 + 2 gamma.
  const double d = config_.d;
  const double m2 = uniform_moment(config_.w_low, config_.w_high, 2);
  const double m4 = uniform_moment(config_.w_low, config_.w_high, 4);
  const double norm2 = d * m2;
  const double norm4 = d * m4 + d * (d - 1.0) * m2 * m2;
  const double g = config_.gamma;
  return std::sqrt(4.0 * norm4 + 8.0 * g * norm2 + 4.0 * g * g);
}

double RidgeModel::strong_convexity() const {
  return config_.n * min_eigenvalue(expected_hessian(0, Vector::Zero(config_.d)));
}

QuadraticModel::QuadraticModel(std::vector<Matrix> curvature,
                               std::vector<Vector> centers, Matrix noise_cov)
    : curvature_(std::move(curvature)), centers_(std::move(centers)) {
  if (curvature_.empty() || curvature_.size() != centers_.size())
    throw DimensionError("quadratic: need one curvature and center per agent");
  const auto d = centers_.front().size();
  for (std::size_t i = 0; i < curvature_.size(); ++i) {
    if (centers_[i].size() != d || curvature_[i].rows() != d ||
        curvature_[i].cols() != d)
      throw DimensionError("quadratic: inconsistent dimensions");
  }
  if (noise_cov.size() == 0) noise_cov = Matrix::Zero(d, d);
  if (noise_cov.rows() != d || noise_cov.cols() != d)
    throw DimensionError("quadratic: noise covariance has wrong shape");
  noisy_ = noise_cov.cwiseAbs().maxCoeff() > 0.0;
  if (noisy_) {
    Eigen::LDLT<Matrix> ldlt(noise_cov);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < 0.0).any())
      throw InvalidArgument("quadratic: noise covariance is not PSD");
    // noise = P^T L sqrt(D) z
    const Matrix ld = Matrix(ldlt.matrixL()) *
                      ldlt.vectorD().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    noise_factor_ = ldlt.transpositionsP().transpose() * ld;
  } else {
    noise_factor_ = Matrix::Zero(d, d);
  }
  if (!(strong_convexity() > 0.0))
    throw InvalidArgument("quadratic: sum of curvatures is not positive definite");
}

void QuadraticModel::sample_gradient(int i, const Eigen::Ref<const Vector>& x,
                                     RandomStream& rng,
                                     Eigen::Ref<Vector> out) const {
  out.noalias() = curvature_[i] * (x - centers_[i]);
  if (noisy_) {
    Vector z(x.size());
    for (Eigen::Index c = 0; c < z.size(); ++c) z(c) = rng.normal();
    out.noalias() += noise_factor_ * z;
  }
}

void QuadraticModel::sample_hessian(int i, const Eigen::Ref<const Vector>&,
                                    RandomStream&, Eigen::Ref<Matrix> out) const {
  out = curvature_[i];
}

Vector QuadraticModel::expected_gradient(int i, const Vector& x) const {
  return curvature_[i] * (x - centers_[i]);
}

Matrix QuadraticModel::expected_hessian(int i, const Vector&) const {
  return curvature_[i];
}

Vector QuadraticModel::optimum() const {
  const auto d = centers_.front().size();
  Matrix lhs = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (std::size_t i = 0; i < curvature_.size(); ++i) {
    lhs += curvature_[i];
    rhs += curvature_[i] * centers_[i];
  }
  return lhs.ldlt().solve(rhs);
}

double QuadraticModel::lipschitz() const {
  double best = 0.0;
  for (const auto& q : curvature_) best = std::max(best, max_eigenvalue(symmetrized(q)));
  return best;
}

double QuadraticModel::strong_convexity() const {
  Matrix total = Matrix::Zero(curvature_.front().rows(), curvature_.front().cols());
  for (const auto& q : curvature_) total += q;
  return min_eigenvalue(symmetrized(total));
}

GroundTruth ground_truth(const Oracle& model, std::int64_t mc_samples,
                         std::uint64_t seed) {
  if (mc_samples < 2) throw InvalidArgument("ground_truth: need >= 2 samples");
  const int n = model.agents();
  const int d = model.dim();
  GroundTruth truth;
  truth.mc_samples = mc_samples;
  truth.x_star = model.optimum();
  truth.H = Matrix::Zero(d, d);
  for (int i = 0; i < n; ++i) truth.H += model.expected_hessian(i, truth.x_star);

  std::vector<RandomStream> streams;
  streams.reserve(n);
  for (int i = 0; i < n; ++i)
    streams.emplace_back(seed, stream_id(0, 0, StreamPurpose::Truth,
                                         static_cast<std::uint32_t>(i)));

  Matrix draws(mc_samples, d);
  Vector sample(d);
  for (std::int64_t s = 0; s < mc_samples; ++s) {
    Vector total = Vector::Zero(d);
    for (int i = 0; i < n; ++i) {
      model.sample_gradient(i, truth.x_star, streams[i], sample);
      total += sample;
    }
    draws.row(s) = total.transpose();
  }
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  draws.rowwise() -= mean;
  const double count = static_cast<double>(mc_samples);
  truth.S = draws.transpose() * draws / (count - 1.0);
  truth.S = symmetrized(truth.S);

  truth.S_stderr = Matrix::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      const Vector products = draws.col(a).cwiseProduct(draws.col(b));
      const double m = products.mean();
      const double var = (products.array() - m).square().sum() / (count - 1.0);
      truth.S_stderr(a, b) = truth.S_stderr(b, a) = std::sqrt(var / count);
    }
  }

  Eigen::LDLT<Matrix> h_factor(truth.H);
  if (h_factor.info() != Eigen::Success || condition_number(truth.H) > 1e12)
    throw SingularError("ground_truth: Hessian is singular",
                        condition_number(truth.H));
  const Matrix h_inv = h_factor.solve(Matrix::Identity(d, d));
  truth.Sigma = symmetrized(h_inv * truth.S * h_inv);
  return truth;
}

}  // namespace sab
