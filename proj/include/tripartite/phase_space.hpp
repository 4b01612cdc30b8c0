#pragma once

#include <Eigen/Dense>

#include "tripartite/fock_lattice.hpp"

namespace tripartite {

/// Rectangular grid over the dimensionless quadratures x, y, with
/// alpha = (x + i y)/sqrt(2). `resolution` points per axis, endpoints included.
struct WignerGridSpec {
  double x_min = -4.5;
  double x_max = 4.5;
  double y_min = -4.5;
  double y_max = 4.5;
  int resolution = 181;

  double dx() const { return (x_max - x_min) / (resolution - 1); }
  double dy() const { return (y_max - y_min) / (resolution - 1); }
  double x(int i) const { return x_min + i * dx(); }
  double y(int j) const { return y_min + j * dy(); }
  /// Area element d^2 alpha of one cell: dx dy / 2.
  double cell_area() const { return 0.5 * dx() * dy(); }
  void validate() const;
};

inline constexpr double kWignerGridTolerance = 1e-3;

struct WignerGrid {
  WignerGridSpec spec;
  Eigen::MatrixXd values;  ///< values(j, i) = W at (x(i), y(j))

  /// sum W d^2 alpha; 1 for a state resolved by the grid.
  double integral() const;
};

/// W(alpha) normalized so that its integral over d^2 alpha is 1 (vacuum peaks
/// at 2/pi). Uses the Laguerre closed form for the Wigner function of |m><n|:
///   (2/pi) (-1)^n sqrt(n!/m!) (2 conj(alpha))^{m-n} e^{-2|alpha|^2} L_n^{(m-n)}(4|alpha|^2), m >= n.
double wigner_at(const PhononState& state, Complex alpha);

/// Evaluates W over the grid. Throws DomainError for an unnormalized or
/// non-Hermitian input.
WignerGrid wigner(const PhononState& state, const WignerGridSpec& spec = {});

/// sum max(0, -W) d^2 alpha.
double wigner_negativity_volume(const WignerGrid& grid);

/// Generalized Laguerre polynomials L_k^{(order)}(x), k = 0..max_degree, by
/// upward recurrence in the degree.
Eigen::VectorXd generalized_laguerre(int max_degree, int order, double x);

}  // namespace tripartite
