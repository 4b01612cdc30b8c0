#pragma once

#include <span>

#include <Eigen/Dense>

namespace tripartite {

struct TridiagonalEigen {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< orthonormal columns, vectors.col(i) pairs with values(i)
};

/// Eigendecomposition of the real symmetric tridiagonal matrix with the given
/// diagonal (length n) and off-diagonal (length n-1), by implicit QR with
/// Wilkinson shifts.
TridiagonalEigen symmetric_tridiagonal_eigen(std::span<const double> diagonal,
                                             std::span<const double> off_diagonal);

}  // namespace tripartite
