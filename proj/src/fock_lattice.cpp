#include "tripartite/fock_lattice.hpp"

#include <cmath>
#include <string>

#include "tripartite/errors.hpp"

namespace tripartite {

void TruncationPolicy::validate() const {
  if (pump_cutoff < 0 || stokes_cutoff < 0 || phonon_cutoff < 0) {
    throw DomainError("truncation cutoffs must be non-negative");
  }
  if (!(tail_mass_tolerance > 0.0 && tail_mass_tolerance < 1.0)) {
    throw DomainError("tail_mass_tolerance must lie in (0, 1)");
  }
}

std::size_t TruncationPolicy::lattice_size() const {
  return static_cast<std::size_t>(pump_cutoff + 1) * static_cast<std::size_t>(stokes_cutoff + 1) *
         static_cast<std::size_t>(phonon_cutoff + 1);
}

TripartiteState::TripartiteState(TruncationPolicy policy, Frame frame)
    : policy_(policy), frame_(frame) {
  policy_.validate();
  amplitudes_.assign(policy_.lattice_size(), Complex{});
}

TripartiteState::TripartiteState(TruncationPolicy policy, std::vector<Complex> amplitudes,
                                 Frame frame)
    : policy_(policy), frame_(frame), amplitudes_(std::move(amplitudes)) {
  policy_.validate();
  if (amplitudes_.size() != policy_.lattice_size()) {
    throw DimensionMismatch("amplitude array has " + std::to_string(amplitudes_.size()) +
                            " entries, lattice needs " + std::to_string(policy_.lattice_size()));
  }
}

bool TripartiteState::contains(const ModeIndex& idx) const {
  return idx.pump >= 0 && idx.stokes >= 0 && idx.phonon >= 0 && idx.pump <= policy_.pump_cutoff &&
         idx.stokes <= policy_.stokes_cutoff && idx.phonon <= policy_.phonon_cutoff;
}

std::size_t TripartiteState::offset(const ModeIndex& idx) const {
  if (!contains(idx)) {
    throw CutoffViolation("Fock index (" + std::to_string(idx.pump) + "," +
                          std::to_string(idx.stokes) + "," + std::to_string(idx.phonon) +
                          ") outside cutoffs (" + std::to_string(policy_.pump_cutoff) + "," +
                          std::to_string(policy_.stokes_cutoff) + "," +
                          std::to_string(policy_.phonon_cutoff) + ")");
  }
  const auto ns = static_cast<std::size_t>(policy_.stokes_cutoff + 1);
  const auto nb = static_cast<std::size_t>(policy_.phonon_cutoff + 1);
  return (static_cast<std::size_t>(idx.pump) * ns + static_cast<std::size_t>(idx.stokes)) * nb +
         static_cast<std::size_t>(idx.phonon);
}

ModeIndex TripartiteState::mode(std::size_t offset) const {
  const auto ns = static_cast<std::size_t>(policy_.stokes_cutoff + 1);
  const auto nb = static_cast<std::size_t>(policy_.phonon_cutoff + 1);
  ModeIndex idx;
  idx.phonon = static_cast<int>(offset % nb);
  offset /= nb;
  idx.stokes = static_cast<int>(offset % ns);
  idx.pump = static_cast<int>(offset / ns);
  return idx;
}

TripartiteState TripartiteState::scaled(Complex factor) const {
  std::vector<Complex> out(amplitudes_);
  for (auto& a : out) a *= factor;
  return TripartiteState(policy_, std::move(out), frame_);
}

TripartiteState TripartiteState::combined(Complex a, const TripartiteState& other,
                                          Complex b) const {
  if (!(other.policy_ == policy_) || other.frame_ != frame_) {
    throw DimensionMismatch("cannot combine states on different lattices or frames");
  }
  std::vector<Complex> out(amplitudes_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a * amplitudes_[i] + b * other.amplitudes_[i];
  }
  return TripartiteState(policy_, std::move(out), frame_);
}

TripartiteState TripartiteState::normalized() const {
  const double n2 = norm_squared(*this);
  if (n2 <= 0.0) throw DomainError("cannot normalize the zero vector");
  return scaled(1.0 / std::sqrt(n2));
}

// ---------------------------------------------------------------------------

PhononState::PhononState(Kind kind, Eigen::VectorXcd amps, Eigen::MatrixXcd rho, double raw_norm)
    : kind_(kind), amplitudes_(std::move(amps)), rho_(std::move(rho)), raw_norm_(raw_norm) {}

PhononState PhononState::from_unnormalized(const Eigen::VectorXcd& amplitudes) {
  const double n2 = amplitudes.squaredNorm();
  if (!(n2 > 0.0)) {
    throw HeraldImpossible("phonon state has zero weight");
  }
  return PhononState(Kind::pure, amplitudes / std::sqrt(n2), {}, n2);
}

PhononState PhononState::from_unnormalized(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols()) throw DimensionMismatch("density matrix must be square");
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) {
    throw HeraldImpossible("phonon density matrix has zero weight");
  }
  return PhononState(Kind::mixed, {}, rho / tr, tr);
}

PhononState PhononState::pure(Eigen::VectorXcd amplitudes, double raw_norm) {
  return PhononState(Kind::pure, std::move(amplitudes), {}, raw_norm);
}

PhononState PhononState::mixed(Eigen::MatrixXcd rho, double raw_norm) {
  if (rho.rows() != rho.cols()) throw DimensionMismatch("density matrix must be square");
  return PhononState(Kind::mixed, {}, std::move(rho), raw_norm);
}

int PhononState::dimension() const {
  return static_cast<int>(kind_ == Kind::pure ? amplitudes_.size() : rho_.rows());
}

const Eigen::VectorXcd& PhononState::amplitudes() const {
  if (kind_ != Kind::pure) throw DomainError("mixed phonon state has no amplitude vector");
  return amplitudes_;
}

Eigen::MatrixXcd PhononState::density() const {
  if (kind_ == Kind::mixed) return rho_;
  return amplitudes_ * amplitudes_.adjoint();
}

Eigen::VectorXd PhononState::probabilities() const {
  if (kind_ == Kind::pure) return amplitudes_.cwiseAbs2();
  return rho_.diagonal().real();
}

double PhononState::trace() const {
  return kind_ == Kind::pure ? amplitudes_.squaredNorm() : rho_.trace().real();
}

double PhononState::purity() const {
  if (kind_ == Kind::pure) {
    const double n2 = amplitudes_.squaredNorm();
    return n2 * n2;
  }
  // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
  return rho_.cwiseAbs2().sum();
}

// ---------------------------------------------------------------------------

TripartiteState make_fock_state(const ModeIndex& idx, const TruncationPolicy& policy) {
  TripartiteState zero(policy);
  std::vector<Complex> amps(zero.size());
  amps[zero.offset(idx)] = 1.0;
  return TripartiteState(policy, std::move(amps));
}

double norm_squared(const TripartiteState& state) {
  double sum = 0.0;
  for (const auto& a : state.amplitudes()) sum += std::norm(a);
  return sum;
}

PhononState partial_trace_phonon(const TripartiteState& state) {
  const auto& pol = state.policy();
  const int nb = pol.phonon_cutoff + 1;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(nb, nb);
  const auto amps = state.amplitudes();
  const std::size_t optical = amps.size() / static_cast<std::size_t>(nb);
  for (std::size_t o = 0; o < optical; ++o) {
    Eigen::Map<const Eigen::VectorXcd> row(amps.data() + o * static_cast<std::size_t>(nb), nb);
    rho.noalias() += row * row.adjoint();
  }
  return PhononState::mixed(std::move(rho), norm_squared(state));
}

TripartiteState embed(const TripartiteState& state, const TruncationPolicy& larger) {
  const auto& p = state.policy();
  if (larger.pump_cutoff < p.pump_cutoff || larger.stokes_cutoff < p.stokes_cutoff ||
      larger.phonon_cutoff < p.phonon_cutoff) {
    throw CutoffViolation("embed target lattice is smaller than the source lattice");
  }
  TripartiteState target(larger, state.frame());
  std::vector<Complex> out(target.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    out[target.offset(state.mode(i))] = state.amplitudes()[i];
  }
  return TripartiteState(larger, std::move(out), state.frame());
}

TripartiteState restrict_to(const TripartiteState& state, const TruncationPolicy& smaller) {
  TripartiteState target(smaller, state.frame());
  std::vector<Complex> out(target.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex idx = target.mode(i);
    if (state.contains(idx)) out[i] = state.at(idx);
  }
  return TripartiteState(smaller, std::move(out), state.frame());
}

TripartiteState convert_frame(const TripartiteState& state, Frame target,
                              const ModeFrequencies& freqs, double t) {
  if (state.frame() == target) return state;
  // interaction -> Schrodinger multiplies by exp(-i E t); the reverse undoes it.
  const double sign = target == Frame::schrodinger ? -1.0 : 1.0;
  std::vector<Complex> out(state.amplitudes().begin(), state.amplitudes().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const ModeIndex m = state.mode(i);
    const double energy = freqs.pump * m.pump + freqs.stokes * m.stokes + freqs.phonon * m.phonon;
    out[i] *= std::polar(1.0, sign * energy * t);
  }
  return TripartiteState(state.policy(), std::move(out), target);
}

// ---------------------------------------------------------------------------

Complex coherent_amplitude(Complex alpha, int n) {
  if (n < 0) return 0.0;
  const double r = std::abs(alpha);
  if (r == 0.0) return n == 0 ? Complex{1.0} : Complex{};
  const double log_mag = n * std::log(r) - 0.5 * r * r - 0.5 * std::lgamma(n + 1.0);
  return std::polar(std::exp(log_mag), n * std::arg(alpha));
}

std::vector<Complex> coherent_amplitudes(Complex alpha, int cutoff) {
  std::vector<Complex> out(static_cast<std::size_t>(std::max(cutoff, -1) + 1));
  for (int n = 0; n <= cutoff; ++n) out[static_cast<std::size_t>(n)] = coherent_amplitude(alpha, n);
  return out;
}

double poisson_tail(double mean, int cutoff) {
  if (mean < 0.0) throw DomainError("Poisson mean must be non-negative");
  if (cutoff < 0) return 1.0;
  if (mean == 0.0) return 0.0;
  // Sum upward from cutoff+1; terms are log-concave so stop once past the mode
  // and negligible.
  double sum = 0.0;
  for (int n = cutoff + 1;; ++n) {
    const double term = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    sum += term;
    if (n > mean && term < 1e-18 * std::max(sum, 1e-300)) break;
    if (n > cutoff + 100000) break;
  }
  return std::min(sum, 1.0);
}

int required_cutoff(double mean, double tolerance) {
  int n = static_cast<int>(std::floor(mean));
  // The tail is monotone decreasing in the cutoff; walk from the mean.
  while (n > 0 && poisson_tail(mean, n - 1) < tolerance) --n;
  while (poisson_tail(mean, n) >= tolerance) ++n;
  return n;
}

}  // namespace tripartite
