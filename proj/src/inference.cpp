#include "sab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sab/errors.hpp"

namespace sab {

PlugInEstimator::PlugInEstimator(int n, int d, double floor)
    : n_(n), d_(d), floor_(floor) {
  if (n < 1 || d < 1) throw InvalidArgument("plug-in: n and d must be >= 1");
  if (!(floor > 0.0)) throw InvalidArgument("plug-in: floor must be > 0");
  mixing_ = Matrix::Identity(n, n);
  s_rows_ = AgentMatrix::Zero(n, d * d);
  h_rows_ = AgentMatrix::Zero(n, d * d);
  prev_grad_ = AgentMatrix::Zero(n, d);
}

void PlugInEstimator::initialize(const AgentMatrix& grads,
                                 const AgentMatrix& hessians) {
  if (grads.rows() != n_ || grads.cols() != d_)
    throw DimensionError("plug-in: gradients must be n x d");
  if (hessians.rows() != n_ || hessians.cols() != d_ * d_)
    throw DimensionError("plug-in: Hessians must be n x d*d");
  mixing_ = Matrix::Identity(n_, n_);
  s_rows_.setZero();
  h_rows_ = hessians;
  prev_grad_ = grads;
  k_ = 0;
  floor_hits_ = 0;
  initialized_ = true;
}

void PlugInEstimator::step(const WeightMatrix& A, const AgentMatrix& grads,
                           const AgentMatrix& hessians) {
  if (!initialized_) throw InvalidArgument("plug-in: step before initialize");
  if (A.size() != n_) throw DimensionError("plug-in: A must be n x n");
  if (grads.rows() != n_ || grads.cols() != d_)
    throw DimensionError("plug-in: gradients must be n x d");
  if (hessians.rows() != n_ || hessians.cols() != d_ * d_)
    throw DimensionError("plug-in: Hessians must be n x d*d");

  const long k = k_ + 1;
  const double carry = static_cast<double>(k) / (k + 1.0);
  mixing_next_.noalias() = A.matrix() * mixing_;
  mixing_.swap(mixing_next_);
  s_mix_.noalias() = A.matrix() * s_rows_;
  h_mix_.noalias() = A.matrix() * h_rows_;

  for (int i = 0; i < n_; ++i) {
    double own = mixing_(i, i);
    if (own < floor_) {
      own = floor_;
      ++floor_hits_;
    }
    const double scale = 1.0 / ((k + 1.0) * own);
    Eigen::Map<const Vector> g(grads.row(i).data(), d_);
    Eigen::Map<const Vector> g_old(prev_grad_.row(i).data(), d_);
    for (int a = 0; a < d_; ++a) {
      for (int b = 0; b < d_; ++b) {
        const double local = 0.5 * (g(a) * (g(b) - g_old(b)) +
                                    (g(a) - g_old(a)) * g(b));
        s_rows_(i, a * d_ + b) = carry * s_mix_(i, a * d_ + b) + scale * local;
      }
    }
    h_rows_.row(i) = carry * h_mix_.row(i) + scale * hessians.row(i);
  }
  prev_grad_ = grads;
  k_ = k;
}

Matrix PlugInEstimator::S(int i) const {
  return Eigen::Map<const AgentMatrix>(s_rows_.row(i).data(), d_, d_);
}

Matrix PlugInEstimator::H(int i) const {
  return Eigen::Map<const AgentMatrix>(h_rows_.row(i).data(), d_, d_);
}

PlugInState PlugInEstimator::state(int i) const {
  PlugInState s;
  s.u_vec = mixing_.row(i).transpose();
  s.S_mat = S(i);
  s.H_mat = H(i);
  s.prev_grad = prev_grad_.row(i).transpose();
  s.k = k_;
  return s;
}

CovarianceEstimate PlugInEstimator::covariance(int i) const {
  return plugin_covariance(state(i));
}

CovarianceEstimate plugin_covariance(const PlugInState& state) {
  const auto d = state.H_mat.rows();
  CovarianceEstimate est;
  est.k = state.k;
  est.condition = condition_number(state.H_mat);
  if (!(est.condition <= 1e12))
    throw SingularError("plug-in Hessian estimate is numerically singular",
                        est.condition);
  const Matrix h_inv = state.H_mat.partialPivLu().solve(Matrix::Identity(d, d));
  est.Sigma_hat = symmetrized(h_inv * state.S_mat * h_inv);
  return est;
}

namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 10000;

double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kGammaMaxIter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a, x) by modified Lentz continued fraction.
double gamma_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw InvalidArgument("regularized_gamma_p: a must be > 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_series(a, x);
  return 1.0 - gamma_continued_fraction(a, x);
}

double chi2_quantile(double beta, int d) {
  if (!(beta > 0.0 && beta < 1.0))
    throw InvalidArgument("chi2_quantile: beta must lie in (0, 1)");
  if (d < 1) throw InvalidArgument("chi2_quantile: d must be >= 1");
  const double shape = 0.5 * d;
  const double target = 1.0 - beta;
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(d));
  while (regularized_gamma_p(shape, 0.5 * hi) < target) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_gamma_p(shape, 0.5 * mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double mahalanobis_squared(const Vector& x_hat, const Matrix& Sigma_hat,
                           const Vector& point) {
  if (x_hat.size() != point.size() || Sigma_hat.rows() != x_hat.size() ||
      Sigma_hat.cols() != x_hat.size())
    throw DimensionError("confidence region: dimension mismatch");
  Eigen::LLT<Matrix> llt(Sigma_hat);
  if (llt.info() != Eigen::Success)
    throw SingularError("confidence region: Sigma is not positive definite",
                        condition_number(Sigma_hat));
  const Vector diff = point - x_hat;
  const Vector z = llt.matrixL().solve(diff);
  return z.squaredNorm();
}

bool confidence_region_contains(const Vector& x_hat, const Matrix& Sigma_hat,
                                long k, double beta, const Vector& point) {
  if (k < 1) throw InvalidArgument("confidence region: k must be >= 1");
  const double radius = chi2_quantile(beta, static_cast<int>(x_hat.size()));
  return mahalanobis_squared(x_hat, Sigma_hat, point) <= radius / k;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

KsResult ks_statistic(std::span<const double> samples, double mean, double sd) {
  if (!(sd > 0.0)) throw InvalidArgument("ks_statistic: sd must be > 0");
  if (samples.size() < 2) throw InvalidArgument("ks_statistic: need >= 2 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  KsResult result;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf((sorted[i] - mean) / sd);
    const double above = (static_cast<double>(i) + 1.0) / n - cdf;
    const double below = cdf - static_cast<double>(i) / n;
    result.D = std::max({result.D, above, below});
  }
  result.critical_5pct = 1.358 / std::sqrt(n);
  return result;
}

}  // namespace sab
