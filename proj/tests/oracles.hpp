#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include <Eigen/Dense>

#include "tripartite/fock_lattice.hpp"

namespace testing_support {

using tripartite::Complex;

// Independent derivation for the phonon-vacuum seed. For n = 2 the chain
// couplings are c1 = sqrt(2(m+1)), c2 = sqrt(2(m+2)) with eigenvalues 0 and
// +-W, W^2 = c1^2 + c2^2.
inline Complex derived_amplitude(int n, int m, int k, double t) {
  const Complex i{0.0, 1.0};
  if (n == 0) return 1.0;
  if (n == 1) {
    const double w = std::sqrt(m + 1.0) * t;
    return k == 0 ? Complex(std::cos(w)) : -i * std::sin(w);
  }
  const double c1 = std::sqrt(2.0 * (m + 1)), c2 = std::sqrt(2.0 * (m + 2));
  const double w2 = c1 * c1 + c2 * c2, w = std::sqrt(w2);
  if (k == 0) return (c2 * c2 + c1 * c1 * std::cos(w * t)) / w2;
  if (k == 1) return -i * c1 * std::sin(w * t) / w;
  return c1 * c2 * (std::cos(w * t) - 1.0) / w2;
}

// Polynomial in (alpha, conj alpha) with alpha and conj alpha treated as
// independent variables; key (i, j) is alpha^i conj(alpha)^j.
using Poly = std::map<std::pair<int, int>, double>;

// (d/d alpha - 2 conj alpha) acting on P e^{-2 alpha conj alpha}, returned
// as the new prefactor of e^{-2 alpha conj alpha}.
inline Poly apply_lowering(const Poly& p) {
  Poly out;
  for (auto [ij, c] : p) {
    auto [i, j] = ij;
    if (i > 0) out[{i - 1, j}] += c * i;
    out[{i, j + 1}] -= 4.0 * c;
  }
  return out;
}

// Derivative-form Wigner function with the 1/pi prefactor doubled so that
// the integral over d^2 alpha is 1.
inline double derivative_form(const Eigen::MatrixXcd& rho, Complex alpha) {
  const int d = static_cast<int>(rho.rows());
  Complex w = 0.0;
  double fk = 1.0;
  for (int k = 0; k < d; ++k) {
    if (k > 0) fk *= k;
    double fk2 = 1.0;
    for (int k2 = 0; k2 < d; ++k2) {
      if (k2 > 0) fk2 *= k2;
      Poly p{{{k2, 0}, 1.0}};
      for (int r = 0; r < k; ++r) p = apply_lowering(p);
      Complex val = 0.0;
      for (auto [ij, c] : p) val += c * std::pow(alpha, ij.first) * std::pow(std::conj(alpha), ij.second);
      const double pref = (k % 2 ? -1.0 : 1.0) * std::pow(2.0, k2 - k) / std::sqrt(fk * fk2);
      w += pref * val * rho(k, k2);
    }
  }
  return 2.0 / std::numbers::pi * (w * std::exp(-2.0 * std::norm(alpha))).real();
}

}  // namespace testing_support
