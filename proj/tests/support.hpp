#pragma once

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "tripartite/fock_lattice.hpp"

namespace testing_support {

using tripartite::Complex;
using tripartite::TripartiteState;
using tripartite::TruncationPolicy;

inline TruncationPolicy policy(int p, int s, int b) {
  TruncationPolicy pol;
  pol.pump_cutoff = p;
  pol.stokes_cutoff = s;
  pol.phonon_cutoff = b;
  return pol;
}

// Normalized state with complex Gaussian amplitudes on every lattice ket.
inline TripartiteState random_state(const TruncationPolicy& pol, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<Complex> amps(pol.lattice_size());
  for (auto& a : amps) a = {gauss(rng), gauss(rng)};
  return TripartiteState(pol, amps).normalized();
}

inline Eigen::VectorXcd as_vector(const TripartiteState& s) {
  const auto a = s.amplitudes();
  return Eigen::Map<const Eigen::VectorXcd>(a.data(), static_cast<Eigen::Index>(a.size()));
}

inline double infidelity(const TripartiteState& a, const TripartiteState& b) {
  const Eigen::VectorXcd u = as_vector(a), v = as_vector(b);
  return 1.0 - std::norm(u.dot(v)) / (u.squaredNorm() * v.squaredNorm());
}

inline double max_abs_diff(const TripartiteState& a, const TripartiteState& b) {
  return (as_vector(a) - as_vector(b)).cwiseAbs().maxCoeff();
}

}  // namespace testing_support
