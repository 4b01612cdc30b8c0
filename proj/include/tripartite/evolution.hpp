#pragma once

#include <map>
#include <span>
#include <vector>

#include "tripartite/fock_lattice.hpp"
#include "tripartite/subspace_block.hpp"

namespace tripartite {

/// Initial preparation of one optical mode.
struct ModeInit {
  enum class Kind { vacuum, coherent, fock };

  Kind kind = Kind::vacuum;
  Complex alpha{};  ///< coherent amplitude
  int photons = 0;  ///< Fock number

  static ModeInit vacuum() { return {}; }
  static ModeInit coherent(Complex a) { return {Kind::coherent, a, 0}; }
  static ModeInit fock(int n) { return {Kind::fock, {}, n}; }

  /// Fock amplitudes 0..cutoff.
  std::vector<Complex> amplitudes(int cutoff) const;
  /// Probability mass above `cutoff`.
  double tail_mass(int cutoff) const;
  /// Smallest cutoff with tail mass below `tolerance`.
  int required_cutoff(double tolerance) const;
};

/// Pump and Stokes preparations; the phonon always starts in its ground state.
struct InitialSpec {
  ModeInit pump;
  ModeInit stokes;
};

struct EvolutionResult {
  std::vector<double> times;  ///< gt
  std::vector<TripartiteState> states;
  /// Norm carried by kets of the evolved sectors that fall outside the lattice.
  std::vector<double> discarded_norm;
};

/// Throws TruncationError if either optical mode leaks more than the policy's
/// tail tolerance above its cutoff.
void check_truncation(const InitialSpec& spec, const TruncationPolicy& policy);

/// sum_{n,m} P_n S_m |n, m, 0> on the lattice.
TripartiteState initial_amplitudes(const InitialSpec& spec, const TruncationPolicy& policy);

/// Exact block-wise propagation under H_int in the interaction picture.
///
/// Each populated sector (N = n_p + n_b, n_S - n_b) is evolved as a whole, so
/// every amplitude kept on the lattice is independent of the cutoffs; weight
/// that lands outside the lattice is reported in `discarded_norm`.
class Evolver {
 public:
  explicit Evolver(BlockCache& cache = default_block_cache()) : cache_(&cache) {}

  EvolutionResult evolve(const TripartiteState& state0, std::span<const double> gt_grid) const;
  TripartiteState evolve_to(const TripartiteState& state0, double gt) const;

 private:
  BlockCache* cache_;
};

EvolutionResult evolve(const TripartiteState& state0, std::span<const double> gt_grid);
TripartiteState evolve_to(const TripartiteState& state0, double gt);

/// exp(-i H_int gt) applied by a Taylor-series action of the full sparse
/// Hamiltonian assembled from single-mode ladder matrices. The lattice is first
/// enlarged until it is closed under H_int for the populated kets, then the
/// result is cut back to the input lattice. Refuses closures above `max_kets`.
TripartiteState brute_force_evolve(const TripartiteState& state0, double gt,
                                   std::size_t max_kets = 2000);

/// Single pump photon with the Stokes mode prepared as `stokes`:
///   sum_m S_m [cos(sqrt(m+1) gt)|1,m,0> - i sin(sqrt(m+1) gt)|0,m+1,1>].
TripartiteState single_pump_photon_state(const ModeInit& stokes, double gt,
                                         const TruncationPolicy& policy);

/// First-order weak-coherent expansion (unnormalized, interaction picture):
///   |000> + a_S|010> + a_p (cos gt |100> - i sin gt |011>).
TripartiteState weak_coherent_state(Complex alpha_p, Complex alpha_s, double gt,
                                    const TruncationPolicy& policy);

/// Quantities conserved by H_int.
enum class Charge {
  pump_plus_phonon,     ///< n_p + n_b
  stokes_minus_phonon,  ///< n_S - n_b
  pump_plus_stokes,     ///< n_p + n_S
};

/// Probability distribution of a conserved charge.
std::map<int, double> charge_distribution(const TripartiteState& state, Charge charge);

}  // namespace tripartite
