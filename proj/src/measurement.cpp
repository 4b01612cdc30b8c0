#include "tripartite/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "tripartite/errors.hpp"

namespace tripartite {

Complex ModeOutcome::overlap(int n) const {
  switch (kind) {
    case Kind::homodyne:
      return std::conj(coherent_amplitude(alpha, n));
    case Kind::count:
      return n == photons ? 1.0 : 0.0;
    case Kind::untouched:
      break;
  }
  throw DomainError("an untouched mode has no outcome overlap");
}

namespace {

void check_outcome(const ModeOutcome& out, int cutoff, double tol, const char* name) {
  if (out.kind == ModeOutcome::Kind::count && out.photons < 0) {
    throw DomainError(std::string(name) + " photon count must be non-negative");
  }
  if (out.kind != ModeOutcome::Kind::homodyne) return;
  const double mean = std::norm(out.alpha);
  if (!std::isfinite(mean)) throw DomainError(std::string(name) + " homodyne amplitude must be finite");
  if (poisson_tail(mean, cutoff) >= tol) {
    const int need = required_cutoff(mean, tol);
    throw TruncationError(std::string(name) + " homodyne amplitude needs cutoff >= " +
                              std::to_string(need) + ", lattice has " + std::to_string(cutoff),
                          name, need);
  }
}

}  // namespace

void check_herald_resolved(const HeraldSpec& spec, const TruncationPolicy& pol) {
  check_outcome(spec.pump, pol.pump_cutoff, pol.tail_mass_tolerance, "pump");
  check_outcome(spec.stokes, pol.stokes_cutoff, pol.tail_mass_tolerance, "stokes");
}

PhononState herald(const TripartiteState& state, const HeraldSpec& spec) {
  const auto& pol = state.policy();
  check_herald_resolved(spec, pol);

  const bool pump_measured = spec.pump.kind != ModeOutcome::Kind::untouched;
  const bool stokes_measured = spec.stokes.kind != ModeOutcome::Kind::untouched;
  if (!pump_measured && !stokes_measured) {
    const Eigen::MatrixXcd rho = partial_trace_phonon(state).density();
    return PhononState::from_unnormalized(rho);
  }

  const int nb = pol.phonon_cutoff + 1;
  std::vector<Complex> w_pump(static_cast<std::size_t>(pol.pump_cutoff + 1), 1.0);
  std::vector<Complex> w_stokes(static_cast<std::size_t>(pol.stokes_cutoff + 1), 1.0);
  if (pump_measured) {
    for (int n = 0; n <= pol.pump_cutoff; ++n) w_pump[static_cast<std::size_t>(n)] = spec.pump.overlap(n);
  }
  if (stokes_measured) {
    for (int n = 0; n <= pol.stokes_cutoff; ++n) {
      w_stokes[static_cast<std::size_t>(n)] = spec.stokes.overlap(n);
    }
  }

  const auto amps = state.amplitudes();
  auto ket = [&](int p, int s, int b) {
    return amps[(static_cast<std::size_t>(p) * static_cast<std::size_t>(pol.stokes_cutoff + 1) +
                 static_cast<std::size_t>(s)) * static_cast<std::size_t>(nb) + static_cast<std::size_t>(b)];
  };

  if (pump_measured && stokes_measured) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(nb);
    for (int p = 0; p <= pol.pump_cutoff; ++p) {
      const Complex wp = w_pump[static_cast<std::size_t>(p)];
      if (wp == Complex{}) continue;
      for (int s = 0; s <= pol.stokes_cutoff; ++s) {
        const Complex w = wp * w_stokes[static_cast<std::size_t>(s)];
        if (w == Complex{}) continue;
        for (int b = 0; b < nb; ++b) c(b) += w * ket(p, s, b);
      }
    }
    if (!(c.squaredNorm() > 0.0)) throw HeraldImpossible("herald outcome has zero weight");
    return PhononState::from_unnormalized(c);
  }

  // One mode measured; sum the conditional vectors incoherently over the other.
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(nb, nb);
  const int free_cutoff = pump_measured ? pol.stokes_cutoff : pol.pump_cutoff;
  const int meas_cutoff = pump_measured ? pol.pump_cutoff : pol.stokes_cutoff;
  for (int f = 0; f <= free_cutoff; ++f) {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(nb);
    for (int q = 0; q <= meas_cutoff; ++q) {
      const int p = pump_measured ? q : f;
      const int s = pump_measured ? f : q;
      const Complex w = pump_measured ? w_pump[static_cast<std::size_t>(q)] : w_stokes[static_cast<std::size_t>(q)];
      if (w == Complex{}) continue;
      for (int b = 0; b < nb; ++b) c(b) += w * ket(p, s, b);
    }
    rho.noalias() += c * c.adjoint();
  }
  if (!(rho.trace().real() > 0.0)) throw HeraldImpossible("herald outcome has zero weight");
  return PhononState::from_unnormalized(rho);
}

PhononState reduced_density_matrix(const InitialSpec& spec, const TruncationPolicy& policy,
                                   double gt, BlockCache& cache) {
  check_truncation(spec, policy);
  if (policy.phonon_cutoff < policy.pump_cutoff) {
    throw CutoffViolation("phonon cutoff must be at least the pump cutoff");
  }
  const auto pump = spec.pump.amplitudes(policy.pump_cutoff);
  const auto stokes = spec.stokes.amplitudes(policy.stokes_cutoff);
  const int kmax = policy.phonon_cutoff;

  // A_{n', m', .}(gt) for every seed (n', m') with nonzero weight.
  std::map<std::pair<int, int>, Eigen::VectorXcd> amp;
  auto amplitudes_for = [&](int n_seed, int m_seed) -> const Eigen::VectorXcd& {
    const auto key = std::make_pair(n_seed, m_seed);
    auto it = amp.find(key);
    if (it == amp.end()) {
      it = amp.emplace(key, amplitudes_at(*cache.block(n_seed, m_seed, 1.0), gt).values).first;
    }
    return it->second;
  };

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(kmax + 1, kmax + 1);
  Eigen::VectorXcd u(kmax + 1);
  for (int n = 0; n <= policy.pump_cutoff; ++n) {
    for (int m = 0; m <= policy.stokes_cutoff; ++m) {
      u.setZero();
      bool any = false;
      for (int k = 0; k <= std::min(kmax, m); ++k) {
        const int n_seed = n + k;
        const int m_seed = m - k;
        if (n_seed > policy.pump_cutoff) break;
        const Complex weight = pump[static_cast<std::size_t>(n_seed)] * stokes[static_cast<std::size_t>(m_seed)];
        if (weight == Complex{}) continue;
        u(k) = weight * amplitudes_for(n_seed, m_seed)(k);
        any = true;
      }
      if (any) rho.noalias() += u * u.adjoint();
    }
  }
  const double tr = rho.trace().real();
  return PhononState::mixed(std::move(rho), tr);
}

double linear_entropy(const PhononState& state) {
  const double tr = state.trace();
  if (!(tr > 0.0)) throw DomainError("linear entropy of a zero state");
  return 1.0 - state.purity() / (tr * tr);
}

LinearEntropyTrace linear_entropy(const InitialSpec& spec, const TruncationPolicy& policy,
                                  std::span<const double> gt_grid, EntropyScale scale) {
  LinearEntropyTrace trace;
  trace.gt_grid.assign(gt_grid.begin(), gt_grid.end());
  const bool single_photon = spec.pump.kind == ModeInit::Kind::fock && spec.pump.photons == 1;
  trace.scale_factor = (scale == EntropyScale::doubled ||
                        (scale == EntropyScale::automatic && single_photon))
                           ? 2.0
                           : 1.0;
  trace.values.reserve(gt_grid.size());
  for (double t : gt_grid) {
    const auto rho = reduced_density_matrix(spec, policy, t);
    trace.values.push_back(trace.scale_factor * linear_entropy(rho));
  }
  return trace;
}

namespace {

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const PhononState& state, const PhononState& target) {
  if (state.dimension() != target.dimension()) {
    throw DimensionMismatch("fidelity between phonon states of dimension " +
                            std::to_string(state.dimension()) + " and " +
                            std::to_string(target.dimension()));
  }
  double f = 0.0;
  const bool state_pure = state.kind() == PhononState::Kind::pure;
  const bool target_pure = target.kind() == PhononState::Kind::pure;
  if (state_pure && target_pure) {
    f = std::norm(target.amplitudes().dot(state.amplitudes()));
  } else if (target_pure) {
    const auto& phi = target.amplitudes();
    f = phi.dot(state.density() * phi).real();
  } else if (state_pure) {
    const auto& psi = state.amplitudes();
    f = psi.dot(target.density() * psi).real();
  } else {
    const Eigen::MatrixXcd root = hermitian_sqrt(state.density());
    const Eigen::MatrixXcd inner = root * target.density() * root;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner);
    const double tr = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    f = tr * tr;
  }
  return std::clamp(f, 0.0, 1.0);
}

PhaseOptimum superposition_fidelity(const PhononState& state, int a, int b) {
  const int d = state.dimension();
  if (a < 0 || b < 0 || a >= d || b >= d || a == b) {
    throw DomainError("superposition levels must be distinct and inside the phonon cutoff");
  }
  const Eigen::MatrixXcd rho = state.density();
  const Complex coherence = rho(a, b);
  PhaseOptimum out;
  out.fidelity = std::clamp(0.5 * (rho(a, a).real() + rho(b, b).real()) + std::abs(coherence), 0.0, 1.0);
  out.phase = -std::arg(coherence);
  return out;
}

PhononState fock_phonon(int k, int dimension) {
  if (k < 0 || k >= dimension) throw DomainError("Fock level outside the phonon dimension");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dimension);
  v(k) = 1.0;
  return PhononState::pure(std::move(v));
}

}  // namespace tripartite
