#include "tripartite/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include "tripartite/errors.hpp"

namespace tripartite {

std::vector<Complex> ModeInit::amplitudes(int cutoff) const {
  std::vector<Complex> out(static_cast<std::size_t>(cutoff + 1));
  switch (kind) {
    case Kind::vacuum:
      out[0] = 1.0;
      break;
    case Kind::fock:
      if (photons <= cutoff) out[static_cast<std::size_t>(photons)] = 1.0;
      break;
    case Kind::coherent:
      out = coherent_amplitudes(alpha, cutoff);
      break;
  }
  return out;
}

double ModeInit::tail_mass(int cutoff) const {
  switch (kind) {
    case Kind::vacuum:
      return cutoff >= 0 ? 0.0 : 1.0;
    case Kind::fock:
      return photons <= cutoff ? 0.0 : 1.0;
    case Kind::coherent:
      return poisson_tail(std::norm(alpha), cutoff);
  }
  return 1.0;
}

int ModeInit::required_cutoff(double tolerance) const {
  switch (kind) {
    case Kind::vacuum:
      return 0;
    case Kind::fock:
      return photons;
    case Kind::coherent:
      return tripartite::required_cutoff(std::norm(alpha), tolerance);
  }
  return 0;
}

void check_truncation(const InitialSpec& spec, const TruncationPolicy& policy) {
  policy.validate();
  const double tol = policy.tail_mass_tolerance;
  auto check = [tol](const ModeInit& mode, int cutoff, const char* name) {
    if (mode.kind == ModeInit::Kind::coherent && !std::isfinite(std::abs(mode.alpha))) {
      throw DomainError(std::string(name) + " coherent amplitude must be finite");
    }
    if (mode.kind == ModeInit::Kind::fock && mode.photons < 0) {
      throw DomainError(std::string(name) + " Fock number must be non-negative");
    }
    const double tail = mode.tail_mass(cutoff);
    if (tail >= tol) {
      const int need = mode.required_cutoff(tol);
      throw TruncationError(std::string(name) + " cutoff " + std::to_string(cutoff) +
                                " leaves tail mass " + std::to_string(tail) +
                                "; need cutoff >= " + std::to_string(need),
                            name, need);
    }
  };
  check(spec.pump, policy.pump_cutoff, "pump");
  check(spec.stokes, policy.stokes_cutoff, "stokes");
}

TripartiteState initial_amplitudes(const InitialSpec& spec, const TruncationPolicy& policy) {
  check_truncation(spec, policy);
  const auto pump = spec.pump.amplitudes(policy.pump_cutoff);
  const auto stokes = spec.stokes.amplitudes(policy.stokes_cutoff);
  TripartiteState shape(policy);
  std::vector<Complex> amps(shape.size());
  for (int n = 0; n <= policy.pump_cutoff; ++n) {
    for (int m = 0; m <= policy.stokes_cutoff; ++m) {
      amps[shape.offset({n, m, 0})] = pump[static_cast<std::size_t>(n)] * stokes[static_cast<std::size_t>(m)];
    }
  }
  return TripartiteState(policy, std::move(amps));
}

// ---------------------------------------------------------------------------

namespace {

struct SectorWork {
  std::shared_ptr<const SubspaceBlock> block;
  Eigen::VectorXcd projected;  // V^T seed
};

std::map<std::pair<int, int>, SectorWork> populated_sectors(const TripartiteState& state,
                                                            BlockCache& cache) {
  std::map<std::pair<int, int>, Eigen::VectorXcd> seeds;
  std::map<std::pair<int, int>, std::shared_ptr<const SubspaceBlock>> blocks;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (amps[i] == Complex{}) continue;
    const ModeIndex idx = state.mode(i);
    const int n = idx.pump + idx.phonon;
    const int m = idx.stokes - idx.phonon;
    const auto key = std::make_pair(n, m);
    auto it = blocks.find(key);
    if (it == blocks.end()) {
      const int k_lo = std::max(0, -m);
      it = blocks.emplace(key, cache.chain(n, m, k_lo, n, 1.0)).first;
      seeds.emplace(key, Eigen::VectorXcd::Zero(it->second->dimension()));
    }
    seeds[key](idx.phonon - it->second->k_lo) = amps[i];
  }
  std::map<std::pair<int, int>, SectorWork> out;
  for (auto& [key, block] : blocks) {
    SectorWork w;
    w.projected = block->eigenvectors.transpose().cast<Complex>() * seeds[key];
    w.block = std::move(block);
    out.emplace(key, std::move(w));
  }
  return out;
}

void require_evolvable(const TripartiteState& state) {
  const auto& p = state.policy();
  if (p.phonon_cutoff < p.pump_cutoff) {
    throw CutoffViolation("phonon cutoff " + std::to_string(p.phonon_cutoff) +
                          " is below pump cutoff " + std::to_string(p.pump_cutoff) +
                          "; phonon number can reach the pump number");
  }
  if (state.frame() != Frame::interaction) {
    throw DomainError("evolution is defined in the interaction picture");
  }
}

}  // namespace

EvolutionResult Evolver::evolve(const TripartiteState& state0, std::span<const double> gt_grid) const {
  require_evolvable(state0);
  const auto sectors = populated_sectors(state0, *cache_);

  EvolutionResult result;
  result.times.assign(gt_grid.begin(), gt_grid.end());
  result.states.reserve(gt_grid.size());
  result.discarded_norm.reserve(gt_grid.size());

  for (double t : gt_grid) {
    std::vector<Complex> amps(state0.size());
    double discarded = 0.0;
    for (const auto& [key, work] : sectors) {
      const auto& block = *work.block;
      Eigen::VectorXcd phased(work.projected.size());
      for (Eigen::Index j = 0; j < phased.size(); ++j) {
        phased(j) = work.projected(j) * std::polar(1.0, -block.eigenvalues(j) * t);
      }
      const Eigen::VectorXcd values = block.eigenvectors.cast<Complex>() * phased;
      for (int j = 0; j < block.dimension(); ++j) {
        const ModeIndex ket = block.ket(j);
        if (state0.contains(ket)) {
          amps[state0.offset(ket)] += values(j);
        } else {
          discarded += std::norm(values(j));
        }
      }
    }
    result.states.emplace_back(state0.policy(), std::move(amps));
    result.discarded_norm.push_back(discarded);
  }
  return result;
}

TripartiteState Evolver::evolve_to(const TripartiteState& state0, double gt) const {
  const double grid[1] = {gt};
  return std::move(evolve(state0, grid).states.front());
}

EvolutionResult evolve(const TripartiteState& state0, std::span<const double> gt_grid) {
  return Evolver().evolve(state0, gt_grid);
}

TripartiteState evolve_to(const TripartiteState& state0, double gt) {
  return Evolver().evolve_to(state0, gt);
}

// ---------------------------------------------------------------------------

namespace {

using SparseReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseReal annihilation(int cutoff) {
  SparseReal a(cutoff + 1, cutoff + 1);
  std::vector<Eigen::Triplet<double>> entries;
  for (int n = 1; n <= cutoff; ++n) entries.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  a.setFromTriplets(entries.begin(), entries.end());
  return a;
}

SparseReal interaction_hamiltonian(const TruncationPolicy& p) {
  const SparseReal ap = annihilation(p.pump_cutoff);
  const SparseReal as = annihilation(p.stokes_cutoff);
  const SparseReal b = annihilation(p.phonon_cutoff);
  const SparseReal as_dag = as.transpose();
  const SparseReal b_dag = b.transpose();
  SparseReal inner = Eigen::kroneckerProduct(as_dag, b_dag);
  SparseReal term = Eigen::kroneckerProduct(ap, inner);
  SparseReal h = term + SparseReal(term.transpose());
  return h;
}

}  // namespace

TripartiteState brute_force_evolve(const TripartiteState& state0, double gt, std::size_t max_kets) {
  TruncationPolicy closed = state0.policy();
  const auto amps = state0.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (amps[i] == Complex{}) continue;
    const ModeIndex idx = state0.mode(i);
    const int total = idx.pump + idx.phonon;
    closed.pump_cutoff = std::max(closed.pump_cutoff, total);
    closed.phonon_cutoff = std::max(closed.phonon_cutoff, total);
    closed.stokes_cutoff = std::max(closed.stokes_cutoff, idx.stokes + idx.pump);
  }
  if (closed.lattice_size() > max_kets) {
    throw SizeError("brute-force lattice needs " + std::to_string(closed.lattice_size()) +
                        " kets, limit is " + std::to_string(max_kets),
                    closed.lattice_size(), max_kets);
  }

  const TripartiteState big = embed(state0, closed);
  const SparseReal h = interaction_hamiltonian(closed);

  // 1-norm bound on ||H||; substeps keep each Taylor argument below one.
  double h_norm = 0.0;
  for (int r = 0; r < h.outerSize(); ++r) {
    double row = 0.0;
    for (SparseReal::InnerIterator it(h, r); it; ++it) row += std::abs(it.value());
    h_norm = std::max(h_norm, row);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(h_norm * std::abs(gt))));
  const double tau = gt / steps;

  Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(big.amplitudes().data(),
                                                          static_cast<Eigen::Index>(big.size()));
  const Complex minus_i_tau{0.0, -tau};
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXcd term = v;
    Eigen::VectorXcd sum = v;
    const double scale = v.norm();
    for (int j = 1; j < 80; ++j) {
      term = (minus_i_tau / static_cast<double>(j)) * (h * term);
      sum += term;
      if (term.norm() <= 1e-18 * scale) break;
    }
    v = std::move(sum);
  }

  std::vector<Complex> out(v.data(), v.data() + v.size());
  return restrict_to(TripartiteState(closed, std::move(out)), state0.policy());
}

// ---------------------------------------------------------------------------

TripartiteState single_pump_photon_state(const ModeInit& stokes, double gt,
                                         const TruncationPolicy& policy) {
  if (policy.pump_cutoff < 1 || policy.phonon_cutoff < 1) {
    throw CutoffViolation("single-photon dynamics needs pump and phonon cutoffs >= 1");
  }
  const auto s = stokes.amplitudes(policy.stokes_cutoff);
  TripartiteState shape(policy);
  std::vector<Complex> amps(shape.size());
  const Complex i{0.0, 1.0};
  for (int m = 0; m <= policy.stokes_cutoff; ++m) {
    const double w = std::sqrt(m + 1.0) * gt;
    amps[shape.offset({1, m, 0})] += s[static_cast<std::size_t>(m)] * std::cos(w);
    if (m + 1 <= policy.stokes_cutoff) {
      amps[shape.offset({0, m + 1, 1})] += -i * s[static_cast<std::size_t>(m)] * std::sin(w);
    }
  }
  return TripartiteState(policy, std::move(amps));
}

TripartiteState weak_coherent_state(Complex alpha_p, Complex alpha_s, double gt,
                                    const TruncationPolicy& policy) {
  if (policy.pump_cutoff < 1 || policy.stokes_cutoff < 1 || policy.phonon_cutoff < 1) {
    throw CutoffViolation("weak-coherent expansion needs all cutoffs >= 1");
  }
  TripartiteState shape(policy);
  std::vector<Complex> amps(shape.size());
  const Complex i{0.0, 1.0};
  amps[shape.offset({0, 0, 0})] = 1.0;
  amps[shape.offset({0, 1, 0})] = alpha_s;
  amps[shape.offset({1, 0, 0})] = alpha_p * std::cos(gt);
  amps[shape.offset({0, 1, 1})] = -i * alpha_p * std::sin(gt);
  return TripartiteState(policy, std::move(amps));
}

std::map<int, double> charge_distribution(const TripartiteState& state, Charge charge) {
  std::map<int, double> dist;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const double w = std::norm(amps[i]);
    if (w == 0.0) continue;
    const ModeIndex idx = state.mode(i);
    int q = 0;
    switch (charge) {
      case Charge::pump_plus_phonon:
        q = idx.pump + idx.phonon;
        break;
      case Charge::stokes_minus_phonon:
        q = idx.stokes - idx.phonon;
        break;
      case Charge::pump_plus_stokes:
        q = idx.pump + idx.stokes;
        break;
    }
    dist[q] += w;
  }
  return dist;
}

}  // namespace tripartite
