#pragma once

#include <span>
#include <vector>

#include "tripartite/evolution.hpp"
#include "tripartite/fock_lattice.hpp"

namespace tripartite {

/// Outcome of measuring one optical mode.
struct ModeOutcome {
  enum class Kind { untouched, homodyne, count };

  Kind kind = Kind::untouched;
  Complex alpha{};  ///< measured coherent amplitude (homodyne)
  int photons = 0;  ///< measured photon number (count)

  static ModeOutcome untouched() { return {}; }
  static ModeOutcome homodyne(Complex a) { return {Kind::homodyne, a, 0}; }
  static ModeOutcome count(int n) { return {Kind::count, {}, n}; }

  /// <outcome|n>: (conj(a))^n e^{-|a|^2/2}/sqrt(n!) for homodyne, delta for
  /// counts. Undefined for untouched modes.
  Complex overlap(int n) const;
};

struct HeraldSpec {
  ModeOutcome pump;
  ModeOutcome stokes;
};

/// Conditions the phonon on the optical outcomes.
///
/// With both modes measured the result is pure, with
///   c_k = sum_{n_p,n_S} <out_p|n_p><out_S|n_S> A(n_p, n_S, k),
/// normalized, and raw_norm = sum |c_k|^2. A homodyne outcome is a projection
/// onto a coherent state, so raw_norm is a relative likelihood density rather
/// than a probability. If one mode is untouched it is traced out and the
/// result is mixed; if both are, this is the partial trace.
///
/// Throws HeraldImpossible for a zero-weight outcome and TruncationError when a
/// homodyne amplitude is not resolved by the mode cutoff.
PhononState herald(const TripartiteState& state, const HeraldSpec& spec);

/// Throws TruncationError if a homodyne outcome leaks more Poisson mass above
/// its mode cutoff than the policy allows, DomainError for a negative count.
void check_herald_resolved(const HeraldSpec& spec, const TruncationPolicy& policy);

/// rho_{kk'} = sum_{n>=0} sum_{m>=max(k,k')} P_{n+k} P*_{n+k'} S_{m-k} S*_{m-k'}
///             A_{n+k,m-k,k}(gt) A*_{n+k',m-k',k'}(gt)
/// over seeds and final kets inside the lattice. The result is mixed with the
/// unnormalized trace in raw_norm.
PhononState reduced_density_matrix(const InitialSpec& spec, const TruncationPolicy& policy,
                                   double gt, BlockCache& cache = default_block_cache());

enum class EntropyScale { unscaled, doubled, automatic };

struct LinearEntropyTrace {
  std::vector<double> gt_grid;
  std::vector<double> values;  ///< scale_factor * (1 - Tr rho^2)
  double scale_factor = 1.0;
};

/// Linear entropy of the traced-out phonon. `automatic` doubles it for a
/// single-pump-photon preparation, whose entropy otherwise peaks at 1/2.
LinearEntropyTrace linear_entropy(const InitialSpec& spec, const TruncationPolicy& policy,
                                  std::span<const double> gt_grid,
                                  EntropyScale scale = EntropyScale::automatic);

/// 1 - Tr rho^2 of a normalized phonon state.
double linear_entropy(const PhononState& state);

/// <phi|rho|phi> for a pure target, |<phi|psi>|^2 for two pure states, and the
/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for two mixed ones.
double fidelity(const PhononState& state, const PhononState& target);

struct PhaseOptimum {
  double fidelity = 0.0;
  double phase = 0.0;
};

/// max over phi of fidelity to (|a> + e^{i phi}|b>)/sqrt(2), which equals
/// (rho_aa + rho_bb)/2 + |rho_ab|.
PhaseOptimum superposition_fidelity(const PhononState& state, int a, int b);

PhononState fock_phonon(int k, int dimension);

}  // namespace tripartite
