#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tripartite/fock_lattice.hpp"

namespace tripartite {

/// Phonon qubit c0|0> + c1|1> driven by a strong Stokes coherent state with
/// the pump in vacuum.
struct PulsePlan {
  enum class Pulse { pi, pi_over_2, custom };

  Complex alpha_s{0.0, 8.0};
  Complex c0{1.0};
  Complex c1{};
  Pulse pulse = Pulse::pi;
  double custom_gt = 0.0;

  /// t_pi = pi/(2|alpha_S|), t_pi/2 = pi/(4|alpha_S|), in units of 1/g.
  double duration() const;
  /// Throws DomainError unless |c0|^2 + |c1|^2 = 1 and alpha_S != 0 (for pi pulses).
  void validate() const;
};

/// Lattice with pump and phonon cutoff 1 and the Stokes cutoff chosen from
/// the Poisson tail of |alpha_S|^2.
TruncationPolicy swap_policy(Complex alpha_s, double tail_mass = kDefaultTailMass);

/// sum_m S_m (c0|0,m,0> + c1|0,m,1>).
TripartiteState swap_initial_state(const PulsePlan& plan, const TruncationPolicy& policy);

/// Exact evolution of the seeded qubit over plan.duration() by the general
/// block-seeded propagator. Throws TruncationError if the Stokes cutoff does
/// not resolve alpha_S.
TripartiteState exact_swap_evolution(const PulsePlan& plan, const TruncationPolicy& policy);

/// The closed form
///   sum_m S_m [c0|0,m,0> + c1 cos(sqrt(m) gt)|0,m,1> - i c1 sin(sqrt(m) gt)|1,m-1,0>]
/// evaluated directly (the m = 0 term has no |1,-1,0> branch).
TripartiteState swap_closed_form(const PulsePlan& plan, const TruncationPolicy& policy);

/// Pump-mode reduced density matrix (Stokes and phonon traced).
Eigen::MatrixXcd pump_reduced(const TripartiteState& state);
/// Pump x phonon reduced density matrix (Stokes traced), index n_p (B+1) + n_b.
Eigen::MatrixXcd pump_phonon_reduced(const TripartiteState& state);

/// Ideal pump qubit after the swap: c0|0> - i e^{i phi} c1 |1>, phi = arg alpha_S.
/// For phi = pi/2 this is c0|0> + c1|1>.
Eigen::VectorXcd ideal_swapped_pump(const PulsePlan& plan, int pump_dimension);

/// <ideal|rho_pump|ideal> at t_pi on swap_policy(alpha_S).
double swap_fidelity(const PulsePlan& plan);
/// Same quantity for an already evolved state.
double swap_fidelity(const TripartiteState& state, const PulsePlan& plan);

/// Ideal (|0,1> - i e^{i phi}|1,0>)/sqrt(2) on (pump, phonon).
Eigen::VectorXcd ideal_bell_state(Complex alpha_s, int pump_dimension, int phonon_dimension);

/// 1 - <Bell|rho_{pump,phonon}|Bell> at t_pi/2 with c0 = 0, c1 = 1.
double bell_state_residual(Complex alpha_s);
double bell_state_residual(const TripartiteState& state, Complex alpha_s);

struct SwapSweepPoint {
  Complex alpha_s;
  double t_pi = 0.0;
  double swap_infidelity = 0.0;
  double bell_residual = 0.0;
};

/// Evaluates both diagnostics for each amplitude; points are independent and
/// run on up to `threads` workers.
std::vector<SwapSweepPoint> swap_sweep(std::span<const Complex> alphas, Complex c0, Complex c1,
                                       unsigned threads = 1);

}  // namespace tripartite
