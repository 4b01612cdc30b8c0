#pragma once

#include <cstdint>
#include <vector>

#include "tripartite/open_system.hpp"

namespace tripartite {

struct TrajectoryConfig {
  std::size_t samples = 512;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Heralded phonon states averaged over quantum-jump trajectories.
struct TrajectoryHerald {
  std::vector<double> gt_grid;
  /// Ensemble-averaged herald weight per time.
  std::vector<double> weight;
  /// Standard error of `weight`.
  std::vector<double> weight_error;
  /// Normalized heralded phonon state per time.
  std::vector<PhononState> states;
};

/// Monte Carlo wave-function unravelling of the same master equation as
/// lindblad_evolve. Between jumps the state evolves as
///   exp(-gamma t (n_p + n_S)/2) exp(-i H_int t)
/// (the two commute), applied exactly through the subspace blocks; jump times
/// solve sum_q w_q exp(-gamma q t) = r exactly. Each realization draws from its
/// own generator seeded from (seed, index), and results are reduced in a
/// fixed order, so output does not depend on the thread count.
///
/// Returns the ensemble average of the (unnormalized) density matrix per time.
std::vector<TripartiteDensity> trajectory_density(const TripartiteState& initial,
                                                  const LindbladConfig& config,
                                                  const TrajectoryConfig& traj);

/// Ensemble average of the heralded phonon projection, without forming the
/// tripartite density matrix.
TrajectoryHerald trajectory_herald(const TripartiteState& initial, const LindbladConfig& config,
                                   const TrajectoryConfig& traj, const HeraldSpec& spec);

}  // namespace tripartite
