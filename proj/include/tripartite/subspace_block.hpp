#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <tuple>

#include <Eigen/Dense>

#include "tripartite/fock_lattice.hpp"

namespace tripartite {

/// Invariant sector of H_int spanned by |n-k, m+k, k>, k = k_lo..k_hi.
///
/// The full block has k_lo = 0, k_hi = n. Sectors seeded with phonons can have
/// m < 0 (then k_lo = -m), and lattices that cut a sector short give k_hi < n.
/// The basis is ordered by ascending phonon number k. The matrix is real
/// symmetric tridiagonal with zero diagonal; the entry coupling k-1 and k is
///   g sqrt(n-k+1) sqrt(m+k) sqrt(k).
struct SubspaceBlock {
  int n = 0;
  int m = 0;
  int k_lo = 0;
  int k_hi = 0;
  double g = 1.0;
  Eigen::VectorXd couplings;     ///< length dimension()-1
  Eigen::VectorXd eigenvalues;   ///< ascending
  Eigen::MatrixXd eigenvectors;  ///< orthonormal columns

  int dimension() const { return k_hi - k_lo + 1; }
  /// Dense copy of the tridiagonal matrix.
  Eigen::MatrixXd matrix() const;
  /// Lattice index of basis position `j`.
  ModeIndex ket(int j) const { return {n - (k_lo + j), m + k_lo + j, k_lo + j}; }
};

/// Amplitudes A_{n,m,k}(t) for the block basis at time t.
struct AmplitudeVector {
  int n = 0;
  int m = 0;
  double t = 0.0;
  Eigen::VectorXcd values;
};

/// Full (n+1)-dimensional block M_nm. Requires n, m >= 0 and g > 0.
SubspaceBlock build_block(int n, int m, double g);

/// Chain restricted to k in [k_lo, k_hi]. Requires 0 <= k_lo <= k_hi <= n and
/// m + k_lo >= 0.
SubspaceBlock build_chain(int n, int m, int k_lo, int k_hi, double g);

/// The maximal chain of block (n, m) for any m >= -n: k_lo = max(0, -m).
SubspaceBlock build_sector(int n, int m, double g);

/// V exp(-i Omega t) V^T initial. `initial` must have the block's dimension.
AmplitudeVector amplitudes_at(const SubspaceBlock& block, double t,
                              const Eigen::Ref<const Eigen::VectorXcd>& initial);

/// Same, seeded with the phonon-vacuum ket (k = 0). Requires k_lo == 0.
AmplitudeVector amplitudes_at(const SubspaceBlock& block, double t);

/// Closed forms of A_{n,m,k}(t) for n <= 2 with A(0) = delta_{k0}.
/// Throws DomainError for n > 2 or k outside 0..n.
Complex amplitude_oracle_closed_form(int n, int m, int k, double g, double t);

/// Thread-safe memo of diagonalized chains keyed by (n, m, k_lo, k_hi) and g
/// quantized to 1e-12.
class BlockCache {
 public:
  std::shared_ptr<const SubspaceBlock> chain(int n, int m, int k_lo, int k_hi, double g);
  std::shared_ptr<const SubspaceBlock> block(int n, int m, double g) { return chain(n, m, 0, n, g); }
  std::size_t size() const;
  void clear();

 private:
  using Key = std::tuple<int, int, int, int, std::int64_t>;
  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const SubspaceBlock>> blocks_;
};

/// Process-wide cache used when callers do not supply their own.
BlockCache& default_block_cache();

}  // namespace tripartite
