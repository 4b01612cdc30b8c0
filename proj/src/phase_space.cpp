#include "tripartite/phase_space.hpp"

#include <cmath>
#include <numbers>

#include "tripartite/errors.hpp"

namespace tripartite {

void WignerGridSpec::validate() const {
  if (resolution < 2) throw DomainError("Wigner grid needs at least 2 points per axis");
  if (!(x_max > x_min) || !(y_max > y_min)) throw DomainError("Wigner grid ranges must be increasing");
}

double WignerGrid::integral() const { return values.sum() * spec.cell_area(); }

Eigen::VectorXd generalized_laguerre(int max_degree, int order, double x) {
  Eigen::VectorXd l(max_degree + 1);
  l(0) = 1.0;
  if (max_degree >= 1) l(1) = 1.0 + order - x;
  for (int k = 1; k < max_degree; ++k) {
    l(k + 1) = ((2.0 * k + 1.0 + order - x) * l(k) - (k + order) * l(k - 1)) / (k + 1.0);
  }
  return l;
}

namespace {

void require_normalized(const PhononState& state) {
  if (std::abs(state.trace() - 1.0) > kIntegratedTolerance) {
    throw DomainError("Wigner function requires a normalized state (trace " +
                      std::to_string(state.trace()) + ")");
  }
  if (state.kind() == PhononState::Kind::mixed) {
    const Eigen::MatrixXcd rho = state.density();
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kUnitaryTolerance) {
      throw DomainError("Wigner function requires a Hermitian density matrix");
    }
  }
}

double wigner_from_density(const Eigen::MatrixXcd& rho, Complex alpha) {
  const int dim = static_cast<int>(rho.rows());
  const double r2 = std::norm(alpha);
  const double x = 4.0 * r2;
  const double gauss = (2.0 / std::numbers::pi) * std::exp(-2.0 * r2);

  double w = 0.0;
  Complex two_alpha_pow{1.0};  // (2 conj(alpha))^d
  for (int d = 0; d < dim; ++d) {
    const int max_n = dim - 1 - d;
    const Eigen::VectorXd lag = generalized_laguerre(max_n, d, x);
    // ratio = sqrt(n!/(n+d)!), updated incrementally in n.
    double ratio = 1.0;
    for (int j = 1; j <= d; ++j) ratio /= std::sqrt(static_cast<double>(j));
    Complex diag_sum{};
    for (int n = 0; n <= max_n; ++n) {
      if (n > 0) ratio *= std::sqrt(static_cast<double>(n) / (n + d));
      const double sign = (n % 2 == 0) ? 1.0 : -1.0;
      diag_sum += rho(n + d, n) * (sign * ratio * lag(n));
    }
    const Complex contribution = diag_sum * two_alpha_pow;
    w += (d == 0) ? contribution.real() : 2.0 * contribution.real();
    two_alpha_pow *= 2.0 * std::conj(alpha);
  }
  return gauss * w;
}

}  // namespace

double wigner_at(const PhononState& state, Complex alpha) {
  require_normalized(state);
  return wigner_from_density(state.density(), alpha);
}

WignerGrid wigner(const PhononState& state, const WignerGridSpec& spec) {
  spec.validate();
  require_normalized(state);
  const Eigen::MatrixXcd rho = state.density();
  WignerGrid grid{spec, Eigen::MatrixXd(spec.resolution, spec.resolution)};
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (int j = 0; j < spec.resolution; ++j) {
    for (int i = 0; i < spec.resolution; ++i) {
      const Complex alpha{spec.x(i) * inv_sqrt2, spec.y(j) * inv_sqrt2};
      grid.values(j, i) = wigner_from_density(rho, alpha);
    }
  }
  return grid;
}

double wigner_negativity_volume(const WignerGrid& grid) {
  return (-grid.values.array()).max(0.0).sum() * grid.spec.cell_area();
}

}  // namespace tripartite
