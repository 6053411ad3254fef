#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sab/linalg.hpp"
#include "sab/rng.hpp"

namespace sab {

/// Stochastic first/second-order oracle for f(x) = sum_i f_i(x) with
/// f_i(x) = E[g_i(x; zeta_i)]. Implementations are immutable; every draw
/// comes from a caller-owned stream.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual int agents() const = 0;
  virtual int dim() const = 0;

  /// Writes a fresh sample of grad g_i(x; zeta) into `out`.
  virtual void sample_gradient(int i, const Eigen::Ref<const Vector>& x,
                               RandomStream& rng,
                               Eigen::Ref<Vector> out) const = 0;
  /// Writes a fresh sample of the Hessian of g_i(x; zeta) into `out`.
  virtual void sample_hessian(int i, const Eigen::Ref<const Vector>& x,
                              RandomStream& rng,
                              Eigen::Ref<Matrix> out) const = 0;

  virtual Vector expected_gradient(int i, const Vector& x) const = 0;
  virtual Matrix expected_hessian(int i, const Vector& x) const = 0;
  /// Unique minimizer of f.
  virtual Vector optimum() const = 0;
  /// L = max_i sqrt(E[L_i(zeta)^2]) for the sample-gradient Lipschitz
  /// modulus L_i(zeta).
  virtual double lipschitz() const = 0;
  /// Strong-convexity modulus of f.
  virtual double strong_convexity() const = 0;

  Vector sample_gradient(int i, const Vector& x, RandomStream& rng) const;
  Matrix sample_hessian(int i, const Vector& x, RandomStream& rng) const;
};

enum class TargetPlacement {
  /// xtilde_i = (low + (high - low) i/(n-1)) * 1
  Diagonal,
  /// xtilde supplied explicitly
  Explicit,
};

struct RidgeConfig {
  int n = 20;
  int d = 3;
  double gamma = 1.0;
  double w_low = 1.0;
  double w_high = 2.0;
  double noise_sd = 1.0;
  double xtilde_low = 1.0;
  double xtilde_high = 10.0;
  TargetPlacement placement = TargetPlacement::Diagonal;
  std::vector<Vector> xtilde;  // used when placement == Explicit
};

/// Ridge regression agents: v_i = w_i^T xtilde_i + nu_i with
/// w_i ~ Uniform[w_low, w_high]^d, nu_i ~ N(0, noise_sd^2), and
/// g_i(x) = (w^T x - v)^2 + gamma ||x||^2.
class RidgeModel final : public Oracle {
 public:
  explicit RidgeModel(RidgeConfig config);

  int agents() const override { return config_.n; }
  int dim() const override { return config_.d; }

  /// Draws w_0..w_{d-1} then nu; returns 2 (w^T x - v) w + 2 gamma x.
  void sample_gradient(int i, const Eigen::Ref<const Vector>& x,
                       RandomStream& rng,
                       Eigen::Ref<Vector> out) const override;
  /// Draws w; returns 2 w w^T + 2 gamma I.
  void sample_hessian(int i, const Eigen::Ref<const Vector>& x,
                      RandomStream& rng, Eigen::Ref<Matrix> out) const override;
  using Oracle::sample_gradient;
  using Oracle::sample_hessian;

  Vector expected_gradient(int i, const Vector& x) const override;
  Matrix expected_hessian(int i, const Vector& x) const override;
  Vector optimum() const override;
  double lipschitz() const override;
  double strong_convexity() const override;

  const RidgeConfig& config() const noexcept { return config_; }
  const Vector& target(int i) const { return xtilde_[i]; }
  /// E[w w^T] in closed form for the uniform box.
  const Matrix& second_moment() const noexcept { return second_moment_; }

 private:
  RidgeConfig config_;
  std::vector<Vector> xtilde_;
  Matrix second_moment_;
};

/// Twenty agents, d = 3, gamma = 1, w ~ U[1,2]^3, nu ~ N(0,1), targets on
/// the diagonal of [1,10]^3.
RidgeConfig paper_ridge_config();

/// f_i(x) = 1/2 (x - c_i)^T Q_i (x - c_i) with optional additive Gaussian
/// gradient noise N(0, noise_cov) shared by all agents.
class QuadraticModel final : public Oracle {
 public:
  QuadraticModel(std::vector<Matrix> curvature, std::vector<Vector> centers,
                 Matrix noise_cov);

  int agents() const override { return static_cast<int>(curvature_.size()); }
  int dim() const override { return static_cast<int>(centers_.front().size()); }

  void sample_gradient(int i, const Eigen::Ref<const Vector>& x,
                       RandomStream& rng,
                       Eigen::Ref<Vector> out) const override;
  void sample_hessian(int i, const Eigen::Ref<const Vector>& x,
                      RandomStream& rng, Eigen::Ref<Matrix> out) const override;
  using Oracle::sample_gradient;
  using Oracle::sample_hessian;

  Vector expected_gradient(int i, const Vector& x) const override;
  Matrix expected_hessian(int i, const Vector& x) const override;
  Vector optimum() const override;
  double lipschitz() const override;
  double strong_convexity() const override;

 private:
  std::vector<Matrix> curvature_;
  std::vector<Vector> centers_;
  Matrix noise_factor_;
  bool noisy_;
};

struct GroundTruth {
  Vector x_star;
  Matrix H;
  Matrix S;
  Matrix Sigma;
  /// Elementwise Monte Carlo standard error of S.
  Matrix S_stderr;
  std::int64_t mc_samples = 0;
};

/// x* and H from the oracle's exact moments; S as the sample covariance of
/// sum_j grad g_j(x*) over `mc_samples` joint draws; Sigma = H^-1 S H^-1.
GroundTruth ground_truth(const Oracle& model, std::int64_t mc_samples,
                         std::uint64_t seed);

}  // namespace sab
