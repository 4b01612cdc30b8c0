#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tripartite/fock_lattice.hpp"

namespace tripartite {

/// Schwinger pseudospin built from the pump and phonon modes:
///   N = (n_p + n_b)/2,  S_z = (n_p - n_b)/2,  S_- = a_p b^+,  S_+ = a_p^+ b,
/// as dense matrices on the truncated pump x phonon space, index n_p (B+1) + n_b.
/// |n_p, n_b> is the spin state |N, m> with n_p = N + m, n_b = N - m.
struct PseudospinOps {
  int pump_cutoff = 0;
  int phonon_cutoff = 0;
  Eigen::MatrixXd n_hat;
  Eigen::MatrixXd s_z;
  Eigen::MatrixXd s_plus;
  Eigen::MatrixXd s_minus;

  int dimension() const { return static_cast<int>(n_hat.rows()); }
  int index(int n_p, int n_b) const { return n_p * (phonon_cutoff + 1) + n_b; }
  /// Kets with n_p + n_b <= min(P, B), on which truncation does not reach the
  /// commutators.
  bool interior(int n_p, int n_b) const;
};

PseudospinOps build_pseudospin(const TruncationPolicy& policy);

/// S^2 = S_z^2 - S_z + S_+ S_-.
Eigen::MatrixXd casimir(const PseudospinOps& ops);

struct SectorSpectrum {
  int twice_n = 0;  ///< 2N = n_p + n_b
  double expected = 0.0;  ///< N(N+1)
  double max_deviation = 0.0;
};

/// Largest entry-wise deviation of each relation, evaluated on interior kets.
struct AlgebraReport {
  double n_sz = 0.0;           ///< [N, S_z]
  double sz_splus = 0.0;       ///< [S_z, S_+] - S_+
  double sz_sminus = 0.0;      ///< [S_z, S_-] + S_-
  double splus_sminus = 0.0;   ///< [S_+, S_-] - 2 S_z
  double adjoint = 0.0;        ///< S_+ - S_-^T
  std::vector<SectorSpectrum> sectors;  ///< every fixed-N sector inside the interior
  std::size_t interior_kets = 0;

  double max_commutator_deviation() const;
  double max_casimir_deviation() const;
};

AlgebraReport verify_algebra(const PseudospinOps& ops);

/// Largest |H_int - (S_- a_S^+ + S_+ a_S)| entry over the truncated tripartite
/// space, both built from single-mode ladder matrices (g = 1). Ordering is
/// (pump, Stokes, phonon) as in TripartiteState.
double pseudospin_hamiltonian_deviation(const TruncationPolicy& policy);

/// Populations (pump photon, phonon) of the spin-1/2 sector |N=1/2, +-1/2>
/// with `stokes_photons` Stokes photons after time gt, from the pseudospin
/// Hamiltonian restricted to {|1/2,+1/2>|m>, |1/2,-1/2>|m+1>}.
Eigen::Vector2d spin_half_rabi(int stokes_photons, double gt);

}  // namespace tripartite
