#pragma once

#include <iosfwd>

#include "sab/graph.hpp"
#include "sab/linalg.hpp"

namespace sab {

enum class Stochasticity { Row, Column, Doubly };

/// Dense nonnegative mixing matrix with positive diagonal. Construction
/// checks the declared stochasticity to within `kStochasticTolerance`.
class WeightMatrix {
 public:
  static constexpr double kStochasticTolerance = 1e-12;

  WeightMatrix(Matrix entries, Stochasticity kind);

  int size() const noexcept { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const noexcept { return entries_; }
  Stochasticity kind() const noexcept { return kind_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  /// max_i |sum_j M_ij - 1|
  double row_residual() const;
  /// max_j |sum_i M_ij - 1|
  double column_residual() const;

  /// n lines of n comma-separated values, round-trip precision.
  void write_csv(std::ostream& os) const;

 private:
  Matrix entries_;
  Stochasticity kind_;
};

/// Perron vectors: u^T A = u^T and B v = v, scaled so u^T 1 = 1^T v = n.
struct EigenPair {
  Vector u;
  Vector v;
  double uv = 0.0;
};

/// Row-stochastic "pull" weights: a_ij = 1/(|N_in(i)|+1) on in-neighbors.
WeightMatrix pull_matrix(const DirectedGraph& g);

/// Column-stochastic "push" weights: b_ji = 1/(|N_out(i)|+1) on out-neighbors.
WeightMatrix push_matrix(const DirectedGraph& g);

/// Symmetric doubly stochastic Metropolis weights on the undirected
/// graph underlying `g`.
WeightMatrix metropolis_matrix(const DirectedGraph& g);

/// Power iteration on A^T and B from 1/n until successive iterates differ by
/// less than `tol` in the max norm. Throws ConvergenceError otherwise.
EigenPair perron_vectors(const WeightMatrix& A, const WeightMatrix& B,
                         double tol = 1e-12, int max_iter = 100000);

/// Spectral-radius estimate of M minus its rank-one limit (1 u^T/n for row,
/// v 1^T/n for column, 1 1^T/n for doubly stochastic). Diagnostic only;
/// it is a surrogate for the weighted-norm contraction factors.
double contraction_diagnostic(const WeightMatrix& M, const EigenPair& pair);

/// The rank-one limit subtracted by `contraction_diagnostic`.
Matrix consensus_residual(const WeightMatrix& M, const EigenPair& pair);

}  // namespace sab
