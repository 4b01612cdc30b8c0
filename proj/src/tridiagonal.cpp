#include "tripartite/tridiagonal.hpp"

#include <Eigen/Eigenvalues>

#include "tripartite/errors.hpp"

namespace tripartite {

TridiagonalEigen symmetric_tridiagonal_eigen(std::span<const double> diagonal,
                                             std::span<const double> off_diagonal) {
  const std::size_t n = diagonal.size();
  if (n == 0) throw DimensionMismatch("empty tridiagonal matrix");
  if (off_diagonal.size() + 1 != n) {
    throw DimensionMismatch("off-diagonal length must be one less than the diagonal");
  }
  const auto dim = static_cast<Eigen::Index>(n);
  const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diagonal.data(), dim);
  const Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(off_diagonal.data(), dim - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("tridiagonal QR iteration did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace tripartite
