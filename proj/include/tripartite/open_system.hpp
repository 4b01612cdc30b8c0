#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "tripartite/fock_lattice.hpp"
#include "tripartite/measurement.hpp"

namespace tripartite {

/// Subset of a truncated lattice on which a density matrix lives.
class KetBasis {
 public:
  KetBasis(TruncationPolicy lattice, std::vector<ModeIndex> kets);

  /// Every lattice ket reachable from the support of `state` by H_int hops and
  /// single pump or Stokes losses, without leaving `lattice`.
  static std::shared_ptr<const KetBasis> reachable(const TripartiteState& state,
                                                   const TruncationPolicy& lattice);
  /// Kets where `state` is nonzero.
  static std::shared_ptr<const KetBasis> support(const TripartiteState& state);

  const TruncationPolicy& lattice() const { return lattice_; }
  const std::vector<ModeIndex>& kets() const { return kets_; }
  std::size_t size() const { return kets_.size(); }
  /// Position of `idx`, or -1 when absent.
  std::ptrdiff_t find(const ModeIndex& idx) const;

  /// Amplitudes of `state` on this basis (kets outside the state lattice read as 0).
  Eigen::VectorXcd coordinates(const TripartiteState& state) const;

 private:
  TruncationPolicy lattice_;
  std::vector<ModeIndex> kets_;
  std::map<ModeIndex, std::size_t> index_;
};

/// Tripartite density matrix over a KetBasis.
struct TripartiteDensity {
  std::shared_ptr<const KetBasis> basis;
  Eigen::MatrixXcd rho;

  static TripartiteDensity from_state(const TripartiteState& state);
  double trace() const { return rho.trace().real(); }
  double purity() const { return rho.cwiseAbs2().sum(); }
  /// <psi|rho|psi>.
  double overlap(const TripartiteState& psi) const;
  /// Partial trace onto one optical mode.
  Eigen::MatrixXcd reduced_pump() const;
  Eigen::MatrixXcd reduced_stokes() const;
  Eigen::MatrixXcd reduced_phonon() const;
};

struct LindbladConfig {
  double gamma = 0.0;  ///< optical decay rate in units of g, same for pump and Stokes
  std::vector<double> gt_grid;
  TruncationPolicy policy;  ///< lattice; the initial state is embedded into it
  double integrator_tolerance = 1e-8;  ///< relative
  double absolute_tolerance = 1e-12;
  double coupling_scale = 1.0;  ///< multiplies H_int; 0 isolates the loss channel
  std::size_t memory_budget_bytes = std::size_t{2} << 30;

  void validate() const;
};

struct DensityTrajectory {
  std::vector<double> gt_grid;
  std::vector<TripartiteDensity> states;
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
};

struct IntegrationStats {
  std::size_t steps_accepted = 0;
  std::size_t steps_rejected = 0;
  std::size_t kets = 0;
};

/// Called once per grid time, in order.
using DensityObserver = std::function<void(std::size_t index, const TripartiteDensity&)>;

/// Integrates
///   d rho/dt = -i [H_int, rho] + gamma/2 sum_{j=p,S} (2 a_j rho a_j^+ - a_j^+ a_j rho - rho a_j^+ a_j)
/// at zero temperature from |initial><initial|, with H_int truncated to the
/// reachable kets of the lattice.
///
/// Because n_p + n_S commutes with H_int the anticommutator decay is removed
/// exactly by the damping-frame substitution
///   rho_ij = exp(-gamma t (q_i + q_j)/2) rho~_ij,   q = n_p + n_S,
/// leaving  d rho~/dt = -i [H_int, rho~] + gamma e^{-gamma t} J(rho~),
/// which an embedded Dormand-Prince 5(4) pair with max-norm error control
/// integrates without the stiffness of large gamma.
///
/// Throws SizeError when the working set exceeds the memory budget and
/// StiffnessError if the step size collapses.
IntegrationStats lindblad_evolve(const TripartiteState& initial, const LindbladConfig& config,
                                 const DensityObserver& observer);

/// Stores every grid state; the budget includes the stored frames.
DensityTrajectory lindblad_evolve(const TripartiteState& initial, const LindbladConfig& config);

/// Phonon state conditioned on the optical outcomes:
///   rho_ph ∝ Tr_{measured}[<outcome| rho |outcome>], with untouched modes traced.
/// Mixed and normalized; raw_norm is the herald weight.
PhononState herald_from_density(const TripartiteDensity& density, const HeraldSpec& spec);

/// Bytes the integrator needs for a basis of `kets` states plus `stored_frames` outputs.
std::size_t lindblad_memory_estimate(std::size_t kets, std::size_t stored_frames);

}  // namespace tripartite
