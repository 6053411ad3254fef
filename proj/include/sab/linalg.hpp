#pragma once

#include <Eigen/Dense>

namespace sab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// One row per agent.
using AgentMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// 2-norm condition number of a square matrix; infinity when singular.
double condition_number(const Matrix& m);

}  // namespace sab
