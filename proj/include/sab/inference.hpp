#pragma once

#include <span>
#include <vector>

#include "sab/linalg.hpp"
#include "sab/weights.hpp"

namespace sab {

/// One agent's view of the distributed plug-in estimator.
struct PlugInState {
  Vector u_vec;      // u_{i,k}: row i of A^k
  Matrix S_mat;      // estimate of S = Cov(sum_j grad g_j(x*))
  Matrix H_mat;      // estimate of H = sum_j Hessian f_j(x*)
  Vector prev_grad;  // grad g_{i,k}
  long k = 0;
};

struct CovarianceEstimate {
  Matrix Sigma_hat;
  long k = 0;
  double condition = 1.0;  // of H_mat
};

/// Distributed online plug-in estimator of H, S and H^-1 S H^-1.
///
/// Each agent mixes its in-neighbours' estimates with the row-stochastic A
/// and adds a local term rescaled by u_{i,k}(i), its running estimate of
/// its own Perron weight u_i/n:
///
///   u_{i,k} = sum_j a_ij u_{j,k-1}
///   S_{i,k} = k/(k+1) sum_j a_ij S_{j,k-1}
///             + [g_k (g_k - g_{k-1})^T + (g_k - g_{k-1}) g_k^T]
///               / (2 (k+1) u_{i,k}(i))
///   H_{i,k} = k/(k+1) sum_j a_ij H_{j,k-1} + Hess_k / ((k+1) u_{i,k}(i))
///
/// The rescaling divisor is floored at `floor`; every floored division is
/// counted in `floor_hits()`. H_{i,0} is the first Hessian sample (the
/// general step evaluated at k = 0), so with n = 1 H is exactly the running
/// mean of the Hessian samples.
class PlugInEstimator {
 public:
  static constexpr double kDefaultFloor = 1e-9;

  PlugInEstimator(int n, int d, double floor = kDefaultFloor);

  /// Sets u_{i,0} = e_i, S_{i,0} = 0, H_{i,0} = hessians[i], prev = grads.
  /// `hessians` holds one row-major flattened d x d sample per agent.
  void initialize(const AgentMatrix& grads, const AgentMatrix& hessians);

  /// Advances k by one with the samples drawn at the current iterate.
  void step(const WeightMatrix& A, const AgentMatrix& grads,
            const AgentMatrix& hessians);

  int agents() const noexcept { return n_; }
  int dim() const noexcept { return d_; }
  long k() const noexcept { return k_; }
  long floor_hits() const noexcept { return floor_hits_; }

  /// Rows u_{i,k}^T; equals A^k.
  const Matrix& mixing_rows() const noexcept { return mixing_; }
  Matrix S(int i) const;
  Matrix H(int i) const;
  PlugInState state(int i) const;
  CovarianceEstimate covariance(int i) const;

 private:
  int n_;
  int d_;
  double floor_;
  long k_ = 0;
  long floor_hits_ = 0;
  bool initialized_ = false;
  Matrix mixing_;
  AgentMatrix s_rows_;
  AgentMatrix h_rows_;
  AgentMatrix prev_grad_;
  Matrix mixing_next_;
  AgentMatrix s_mix_;
  AgentMatrix h_mix_;
};

/// Sigma_hat = sym(H^-1 S H^-1). Throws SingularError when cond(H) > 1e12.
CovarianceEstimate plugin_covariance(const PlugInState& state);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// q with P(U > q) = beta for U ~ chi-square(d), by bisection on P(d/2, q/2)
/// to absolute tolerance 1e-10.
double chi2_quantile(double beta, int d);

/// (p - x_hat)^T Sigma^-1 (p - x_hat). Throws SingularError if Sigma is not
/// positive definite.
double mahalanobis_squared(const Vector& x_hat, const Matrix& Sigma_hat,
                           const Vector& point);

/// True iff (p - x_hat)^T Sigma^-1 (p - x_hat) <= chi2_beta(d) / k.
bool confidence_region_contains(const Vector& x_hat, const Matrix& Sigma_hat,
                                long k, double beta, const Vector& point);

/// Standard normal CDF.
double normal_cdf(double z);

struct KsResult {
  double D = 0.0;
  double critical_5pct = 0.0;  // 1.358 / sqrt(N)
  bool rejects() const { return D >= critical_5pct; }
};

/// One-sample Kolmogorov-Smirnov statistic against N(mean, sd^2).
KsResult ks_statistic(std::span<const double> samples, double mean, double sd);

}  // namespace sab
