#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tripartite {

using Complex = std::complex<double>;

/// Slack for identities that hold algebraically along a unitary path.
inline constexpr double kUnitaryTolerance = 1e-10;
/// Slack for quantities produced by an ODE integrator.
inline constexpr double kIntegratedTolerance = 1e-6;
inline constexpr double kDefaultTailMass = 1e-4;

/// Per-mode Fock cutoffs (inclusive) for the pump, Stokes and phonon modes.
struct TruncationPolicy {
  int pump_cutoff = 0;
  int stokes_cutoff = 0;
  int phonon_cutoff = 0;
  double tail_mass_tolerance = kDefaultTailMass;

  /// Throws DomainError when a cutoff is negative or the tolerance is not in (0,1).
  void validate() const;
  std::size_t lattice_size() const;
  bool operator==(const TruncationPolicy&) const = default;
};

struct ModeIndex {
  int pump = 0;
  int stokes = 0;
  int phonon = 0;

  auto operator<=>(const ModeIndex&) const = default;
};

enum class Frame { interaction, schrodinger };

/// Free-evolution angular frequencies of the three modes, used only for
/// frame conversion.
struct ModeFrequencies {
  double pump = 0.0;
  double stokes = 0.0;
  double phonon = 0.0;
};

/// Pure state on the truncated (n_p, n_S, n_b) lattice. Storage is dense and
/// row-major with the phonon index fastest.
class TripartiteState {
 public:
  /// Zero vector on the lattice of `policy`.
  explicit TripartiteState(TruncationPolicy policy, Frame frame = Frame::interaction);
  TripartiteState(TruncationPolicy policy, std::vector<Complex> amplitudes,
                  Frame frame = Frame::interaction);

  const TruncationPolicy& policy() const { return policy_; }
  Frame frame() const { return frame_; }
  std::size_t size() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }

  bool contains(const ModeIndex& idx) const;
  /// Linear offset of `idx`; throws CutoffViolation outside the lattice.
  std::size_t offset(const ModeIndex& idx) const;
  ModeIndex mode(std::size_t offset) const;

  Complex at(const ModeIndex& idx) const { return amplitudes_[offset(idx)]; }
  Complex at(int n_p, int n_s, int n_b) const { return at(ModeIndex{n_p, n_s, n_b}); }

  TripartiteState scaled(Complex factor) const;
  /// `a*this + b*other`; lattices and frames must agree.
  TripartiteState combined(Complex a, const TripartiteState& other, Complex b) const;
  TripartiteState normalized() const;

 private:
  TruncationPolicy policy_;
  Frame frame_;
  std::vector<Complex> amplitudes_;
};

/// Single-mode phonon state: a Fock-basis vector or a density matrix, plus
/// the weight it carried before normalization (the herald likelihood).
class PhononState {
 public:
  enum class Kind { pure, mixed };

  /// Stores `amplitudes` divided by their norm; raw_norm is the squared norm.
  static PhononState from_unnormalized(const Eigen::VectorXcd& amplitudes);
  /// Stores `rho` divided by its trace; raw_norm is the trace.
  static PhononState from_unnormalized(const Eigen::MatrixXcd& rho);
  /// Stores the inputs as given.
  static PhononState pure(Eigen::VectorXcd amplitudes, double raw_norm = 1.0);
  static PhononState mixed(Eigen::MatrixXcd rho, double raw_norm = 1.0);

  Kind kind() const { return kind_; }
  int dimension() const;
  double raw_norm() const { return raw_norm_; }

  /// Fock amplitudes; throws DomainError on a mixed state.
  const Eigen::VectorXcd& amplitudes() const;
  /// Density matrix (outer product for pure states).
  Eigen::MatrixXcd density() const;
  Eigen::VectorXd probabilities() const;
  double trace() const;
  double purity() const;

 private:
  PhononState(Kind kind, Eigen::VectorXcd amps, Eigen::MatrixXcd rho, double raw_norm);

  Kind kind_;
  Eigen::VectorXcd amplitudes_;
  Eigen::MatrixXcd rho_;
  double raw_norm_;
};

TripartiteState make_fock_state(const ModeIndex& idx, const TruncationPolicy& policy);

double norm_squared(const TripartiteState& state);

/// rho_{kk'} = sum_{n_p,n_S} A(n_p,n_S,k) A*(n_p,n_S,k'); not renormalized, so the
/// trace equals norm_squared(state).
PhononState partial_trace_phonon(const TripartiteState& state);

/// Copies `state` onto a lattice at least as large in every mode.
TripartiteState embed(const TripartiteState& state, const TruncationPolicy& larger);
/// Drops amplitudes outside `smaller`.
TripartiteState restrict_to(const TripartiteState& state, const TruncationPolicy& smaller);

/// Applies exp(-i H_0 t) (to Schrodinger) or its inverse (to interaction).
TripartiteState convert_frame(const TripartiteState& state, Frame target,
                              const ModeFrequencies& freqs, double t);

// Coherent and Poisson helpers shared by the modules that build coherent
// superpositions or project onto them.

/// <n|alpha> for n = 0..cutoff.
std::vector<Complex> coherent_amplitudes(Complex alpha, int cutoff);
/// <n|alpha> for a single n, evaluated in log space.
Complex coherent_amplitude(Complex alpha, int n);
/// sum_{n > cutoff} e^{-mean} mean^n / n!
double poisson_tail(double mean, int cutoff);
/// Smallest N with poisson_tail(mean, N) < tolerance.
int required_cutoff(double mean, double tolerance);

}  // namespace tripartite
