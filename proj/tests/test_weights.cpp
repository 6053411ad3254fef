#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "sab/errors.hpp"
#include "sab/graph.hpp"
#include "sab/weights.hpp"

using namespace sab;

namespace {

// Left null vector of (A^T - I) scaled to sum n, via dense QR.
Vector dense_left_perron(const Matrix& A) {
  const int n = static_cast<int>(A.rows());
  Matrix M(n + 1, n);
  M.topRows(n) = A.transpose() - Matrix::Identity(n, n);
  M.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = n;
  return M.colPivHouseholderQr().solve(rhs);
}

double dense_spectral_radius(const Matrix& M) {
  return Eigen::EigenSolver<Matrix>(M).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("pull matrix on a 4-ring") {
  const auto A = pull_matrix(ring_graph(4));
  for (int i = 0; i < 4; ++i) {
    CHECK(A(i, (i + 3) % 4) == 0.5);
    CHECK(A(i, i) == 0.5);
  }
  CHECK(A.row_residual() <= 1e-12);
}

TEST_CASE("push matrix on a 4-ring") {
  const auto B = push_matrix(ring_graph(4));
  for (int i = 0; i < 4; ++i) {
    CHECK(B((i + 1) % 4, i) == 0.5);
    CHECK(B(i, i) == 0.5);
  }
  CHECK(B.column_residual() <= 1e-12);
}

TEST_CASE("empty and complete graphs") {
  const auto e = empty_graph(3);
  CHECK(pull_matrix(e).matrix() == Matrix::Identity(3, 3));
  CHECK(push_matrix(e).matrix() == Matrix::Identity(3, 3));
  CHECK(metropolis_matrix(e).matrix() == Matrix::Identity(3, 3));
  const auto c = complete_graph(3);
  CHECK(pull_matrix(c).matrix().isApproxToConstant(1.0 / 3.0, 1e-15));
  const auto B = push_matrix(c);
  CHECK(B.matrix().isApproxToConstant(1.0 / 3.0, 1e-15));
  CHECK(B.row_residual() <= 1e-12);
}

TEST_CASE("metropolis examples") {
  const auto W2 = metropolis_matrix(DirectedGraph(2, {{0, 1}}));
  CHECK(W2.matrix().isApproxToConstant(0.5, 1e-15));
  const auto W = metropolis_matrix(DirectedGraph(3, {{0, 1}, {2, 0}}));
  CHECK(W(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(W(0, 2) == doctest::Approx(1.0 / 3.0));
  CHECK(W(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(W(1, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(W(2, 2) == doctest::Approx(2.0 / 3.0));
  CHECK(W(1, 2) == 0.0);
}

TEST_CASE("construction rejects invalid matrices") {
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.2, 0.8;
  CHECK_NOTHROW(WeightMatrix(m, Stochasticity::Row));
  CHECK_THROWS_AS(WeightMatrix(m, Stochasticity::Column), InvalidArgument);
  m << 1.2, -0.2, 0.5, 0.5;
  CHECK_THROWS_AS(WeightMatrix(m, Stochasticity::Row), InvalidArgument);
  m << 0.0, 1.0, 0.5, 0.5;
  CHECK_THROWS_AS(WeightMatrix(m, Stochasticity::Row), InvalidArgument);
}

TEST_CASE("stochasticity invariants on random graphs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = ring_plus_random(12, 0.05 * static_cast<double>(seed % 10), seed);
    const auto A = pull_matrix(g);
    const auto B = push_matrix(g);
    const auto W = metropolis_matrix(g);
    CHECK(A.row_residual() <= 1e-12);
    CHECK(B.column_residual() <= 1e-12);
    CHECK(W.row_residual() <= 1e-12);
    CHECK(W.column_residual() <= 1e-12);
    CHECK((W.matrix() - W.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(A.matrix().diagonal().minCoeff() > 0.0);
    CHECK(B.matrix().diagonal().minCoeff() > 0.0);
    CHECK(W.matrix().diagonal().minCoeff() > 0.0);
    CHECK(A.matrix().minCoeff() >= 0.0);
  }
}

TEST_CASE("perron vectors against a dense solve") {
  const auto g = ring_plus_random(20, 0.3, 7);
  const auto A = pull_matrix(g);
  const auto B = push_matrix(g);
  const EigenPair pair = perron_vectors(A, B);
  const Vector u_ref = dense_left_perron(A.matrix());
  const Vector v_ref = dense_left_perron(B.matrix().transpose());
  CHECK((pair.u - u_ref).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((pair.v - v_ref).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(pair.u.sum() == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(pair.v.sum() == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(pair.u.minCoeff() >= 0.0);
  CHECK(pair.v.minCoeff() >= 0.0);
  CHECK(pair.uv == doctest::Approx(pair.u.dot(pair.v)));
  CHECK((pair.u.transpose() * A.matrix() - pair.u.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((B.matrix() * pair.v - pair.v).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("perron vectors of doubly stochastic matrices are ones") {
  const auto W = metropolis_matrix(ring_plus_random(10, 0.3, 1));
  const EigenPair pair = perron_vectors(W, W);
  CHECK((pair.u - Vector::Ones(10)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((pair.v - Vector::Ones(10)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(pair.uv == doctest::Approx(10.0));
}

TEST_CASE("perron iteration reports non-convergence") {
  const auto A = pull_matrix(ring_plus_random(20, 0.3, 7));
  CHECK_THROWS_AS(perron_vectors(A, push_matrix(ring_plus_random(20, 0.3, 7)), 1e-12, 2),
                  ConvergenceError);
}

TEST_CASE("contraction diagnostic") {
  const WeightMatrix I(Matrix::Identity(4, 4), Stochasticity::Doubly);
  const EigenPair ones{Vector::Ones(4), Vector::Ones(4), 4.0};
  CHECK(contraction_diagnostic(I, ones) == doctest::Approx(1.0).epsilon(1e-9));

  const auto C = pull_matrix(complete_graph(3));
  const EigenPair ones3{Vector::Ones(3), Vector::Ones(3), 3.0};
  CHECK(contraction_diagnostic(C, ones3) < 1e-12);

  const auto g = ring_plus_random(20, 0.3, 7);
  const auto A = pull_matrix(g);
  const auto B = push_matrix(g);
  const EigenPair pair = perron_vectors(A, B);
  for (const WeightMatrix* M : {&A, &B}) {
    const double rho = contraction_diagnostic(*M, pair);
    const double ref = dense_spectral_radius(consensus_residual(*M, pair));
    CHECK(rho > 0.0);
    CHECK(rho < 1.0);
    CHECK(rho == doctest::Approx(ref).epsilon(0.02));
  }
}

TEST_CASE("csv output has n rows of n values") {
  const auto A = pull_matrix(ring_graph(3));
  std::ostringstream os;
  A.write_csv(os);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(std::count(text.begin(), text.end(), ',') == 6);
  CHECK(text.substr(0, 4) == "0.5,");
}
