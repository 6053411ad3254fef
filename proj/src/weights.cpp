#include "sab/weights.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "sab/errors.hpp"
#include "sab/format.hpp"

namespace sab {

WeightMatrix::WeightMatrix(Matrix entries, Stochasticity kind)
    : entries_(std::move(entries)), kind_(kind) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
    throw DimensionError("weight matrix must be square and nonempty");
  if ((entries_.array() < 0.0).any())
    throw InvalidArgument("weight matrix has negative entries");
  if ((entries_.diagonal().array() <= 0.0).any())
    throw InvalidArgument("weight matrix has a nonpositive diagonal entry");
  const bool rows_ok = row_residual() <= kStochasticTolerance;
  const bool cols_ok = column_residual() <= kStochasticTolerance;
  const bool ok = kind == Stochasticity::Row      ? rows_ok
                  : kind == Stochasticity::Column ? cols_ok
                                                  : rows_ok && cols_ok;
  if (!ok) {
    std::ostringstream msg;
    msg << "weight matrix violates declared stochasticity (row residual "
        << row_residual() << ", column residual " << column_residual() << ")";
    throw InvalidArgument(msg.str());
  }
}

double WeightMatrix::row_residual() const {
  return (entries_.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double WeightMatrix::column_residual() const {
  return (entries_.colwise().sum().array() - 1.0).abs().maxCoeff();
}

void WeightMatrix::write_csv(std::ostream& os) const {
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      if (j > 0) os << ',';
      os << format_real(entries_(i, j));
    }
    os << '\n';
  }
}

WeightMatrix pull_matrix(const DirectedGraph& g) {
  const int n = g.size();
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& in = g.in_neighbors(i);
    const double w = 1.0 / (static_cast<double>(in.size()) + 1.0);
    double off = 0.0;
    for (int j : in) {
      a(i, j) = w;
      off += w;
    }
    a(i, i) = 1.0 - off;
  }
  return WeightMatrix(std::move(a), Stochasticity::Row);
}

WeightMatrix push_matrix(const DirectedGraph& g) {
  const int n = g.size();
  Matrix b = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& out = g.out_neighbors(i);
    const double w = 1.0 / (static_cast<double>(out.size()) + 1.0);
    double off = 0.0;
    for (int j : out) {
      b(j, i) = w;
      off += w;
    }
    b(i, i) = 1.0 - off;
  }
  return WeightMatrix(std::move(b), Stochasticity::Column);
}

WeightMatrix metropolis_matrix(const DirectedGraph& g) {
  const int n = g.size();
  std::vector<std::vector<char>> adjacent(n, std::vector<char>(n, 0));
  for (const auto& e : g.edges()) {
    adjacent[e.from][e.to] = 1;
    adjacent[e.to][e.from] = 1;
  }
  std::vector<int> degree(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) degree[i] += adjacent[i][j];

  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!adjacent[i][j]) continue;
      w(i, j) = 1.0 / (1.0 + std::max(degree[i], degree[j]));
      off += w(i, j);
    }
    w(i, i) = 1.0 - off;
  }
  return WeightMatrix(std::move(w), Stochasticity::Doubly);
}

namespace {

// Power iteration x <- M x with sum-normalization; M is column stochastic
// so the iterate stays a probability vector.
Vector stationary_vector(const Matrix& m, double tol, int max_iter,
                         const char* label) {
  const auto n = m.rows();
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Vector next(n);
  double diff = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    next.noalias() = m * x;
    next /= next.sum();
    diff = (next - x).cwiseAbs().maxCoeff();
    x.swap(next);
    if (diff < tol) return x;
  }
  throw ConvergenceError(std::string("perron_vectors: ") + label +
                             " power iteration did not converge",
                         diff);
}

}  // namespace

EigenPair perron_vectors(const WeightMatrix& A, const WeightMatrix& B,
                         double tol, int max_iter) {
  if (A.size() != B.size())
    throw DimensionError("perron_vectors: A and B differ in size");
  const double n = A.size();
  EigenPair pair;
  pair.u = n * stationary_vector(A.matrix().transpose(), tol, max_iter, "u");
  pair.v = n * stationary_vector(B.matrix(), tol, max_iter, "v");
  pair.uv = pair.u.dot(pair.v);
  return pair;
}

Matrix consensus_residual(const WeightMatrix& M, const EigenPair& pair) {
  const auto n = M.size();
  const Vector ones = Vector::Ones(n);
  switch (M.kind()) {
    case Stochasticity::Row:
      return M.matrix() - ones * pair.u.transpose() / n;
    case Stochasticity::Column:
      return M.matrix() - pair.v * ones.transpose() / n;
    case Stochasticity::Doubly:
      break;
  }
  return M.matrix() - ones * ones.transpose() / n;
}

double contraction_diagnostic(const WeightMatrix& M, const EigenPair& pair) {
  constexpr int kWarmup = 500;
  constexpr int kMeasured = 1500;
  const Matrix r = consensus_residual(M, pair);
  const auto n = r.rows();
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i)
    x(i) = std::sin(1.0 + 1.7 * static_cast<double>(i)) + 0.1;
  x.normalize();
  Vector y(n);
  double log_growth = 0.0;
  for (int it = 0; it < kWarmup + kMeasured; ++it) {
    y.noalias() = r * x;
    const double norm = y.norm();
    if (!(norm > 1e-300)) return 0.0;
    if (it >= kWarmup) log_growth += std::log(norm);
    x = y / norm;
  }
  return std::exp(log_growth / kMeasured);
}

}  // namespace sab
