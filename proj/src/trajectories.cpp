#include "tripartite/trajectories.hpp"

#include <cmath>
#include <map>
#include <random>

#include <Eigen/Sparse>

#include "parallel.hpp"
#include "tripartite/errors.hpp"
#include "tripartite/subspace_block.hpp"

namespace tripartite {

namespace {

// Fixed number of accumulation lanes; sample i always lands in lane i % kLanes.
constexpr std::size_t kLanes = 8;

struct Run {
  std::shared_ptr<const SubspaceBlock> block;  // null for a single ket
  std::vector<Eigen::Index> members;           // basis positions, ascending phonon number
};

class JumpModel {
 public:
  JumpModel(std::shared_ptr<const KetBasis> basis, double gamma, double coupling)
      : basis_(std::move(basis)), gamma_(gamma) {
    const auto& kets = basis_->kets();
    const auto d = static_cast<Eigen::Index>(kets.size());
    charge_.resize(d);
    int q_max = 0;
    std::map<std::pair<int, int>, std::map<int, Eigen::Index>> sectors;
    std::vector<Eigen::Triplet<double>> tp, ts;
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto& k = kets[static_cast<std::size_t>(i)];
      charge_(i) = k.pump + k.stokes;
      q_max = std::max(q_max, charge_(i));
      sectors[{k.pump + k.phonon, k.stokes - k.phonon}][k.phonon] = i;
      const auto jp = basis_->find({k.pump - 1, k.stokes, k.phonon});
      if (k.pump > 0 && jp >= 0) tp.emplace_back(jp, i, std::sqrt(static_cast<double>(k.pump)));
      const auto js = basis_->find({k.pump, k.stokes - 1, k.phonon});
      if (k.stokes > 0 && js >= 0) ts.emplace_back(js, i, std::sqrt(static_cast<double>(k.stokes)));
    }
    q_max_ = q_max;
    a_pump_.resize(d, d);
    a_pump_.setFromTriplets(tp.begin(), tp.end());
    a_stokes_.resize(d, d);
    a_stokes_.setFromTriplets(ts.begin(), ts.end());

    auto& cache = default_block_cache();
    for (const auto& [key, by_k] : sectors) {
      Run run;
      int prev = -2;
      auto flush = [&] {
        if (run.members.empty()) return;
        if (run.members.size() > 1 && coupling > 0.0) {
          const int k_hi = prev;
          const int k_lo = k_hi - static_cast<int>(run.members.size()) + 1;
          run.block = cache.chain(key.first, key.second, k_lo, k_hi, coupling);
        }
        runs_.push_back(std::move(run));
        run = Run{};
      };
      for (const auto& [k, idx] : by_k) {
        if (k != prev + 1) flush();
        run.members.push_back(idx);
        prev = k;
      }
      flush();
    }
  }

  Eigen::Index size() const { return charge_.size(); }

  // psi <- exp(-gamma Q tau / 2) exp(-i H tau) psi
  void propagate(Eigen::VectorXcd& psi, double tau) const {
    if (tau == 0.0) return;
    for (const auto& run : runs_) {
      if (!run.block) continue;
      const auto n = static_cast<Eigen::Index>(run.members.size());
      Eigen::VectorXcd seg(n);
      for (Eigen::Index j = 0; j < n; ++j) seg(j) = psi(run.members[static_cast<std::size_t>(j)]);
      const auto out = amplitudes_at(*run.block, tau, seg);
      for (Eigen::Index j = 0; j < n; ++j) psi(run.members[static_cast<std::size_t>(j)]) = out.values(j);
    }
    if (gamma_ > 0.0) {
      std::vector<double> decay(static_cast<std::size_t>(q_max_) + 1);
      for (int q = 0; q <= q_max_; ++q) decay[static_cast<std::size_t>(q)] = std::exp(-0.5 * gamma_ * q * tau);
      for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) *= decay[static_cast<std::size_t>(charge_(i))];
    }
  }

  // Squared norm after a no-jump interval tau: sum_q w_q exp(-gamma q tau).
  std::vector<double> charge_weights(const Eigen::VectorXcd& psi) const {
    std::vector<double> w(static_cast<std::size_t>(q_max_) + 1, 0.0);
    for (Eigen::Index i = 0; i < psi.size(); ++i) w[static_cast<std::size_t>(charge_(i))] += std::norm(psi(i));
    return w;
  }

  // Smallest tau in [0, horizon] with sum_q w_q exp(-gamma q tau) = r, or a
  // negative value when the norm stays above r.
  double jump_time(const std::vector<double>& w, double r, double horizon) const {
    auto f = [&](double tau, double* df) {
      double v = -r, d = 0.0;
      for (std::size_t q = 0; q < w.size(); ++q) {
        if (w[q] == 0.0) continue;
        const double e = w[q] * std::exp(-gamma_ * static_cast<double>(q) * tau);
        v += e;
        d -= gamma_ * static_cast<double>(q) * e;
      }
      if (df) *df = d;
      return v;
    };
    if (gamma_ == 0.0 || f(horizon, nullptr) > 0.0) return -1.0;
    // Convex and decreasing: Newton from the left converges monotonically.
    double lo = 0.0, hi = horizon, tau = 0.0;
    for (int it = 0; it < 200; ++it) {
      double df = 0.0;
      const double v = f(tau, &df);
      if (v > 0.0) lo = tau; else hi = tau;
      double next = (df < 0.0) ? tau - v / df : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - tau) <= 1e-15 * std::max(1.0, tau) || hi - lo <= 1e-15 * std::max(1.0, hi)) {
        return next;
      }
      tau = next;
    }
    return 0.5 * (lo + hi);
  }

  // Applies a randomly chosen loss operator and renormalizes.
  template <typename Rng>
  void jump(Eigen::VectorXcd& psi, Rng& rng) const {
    Eigen::VectorXcd ap = a_pump_ * psi;
    Eigen::VectorXcd as = a_stokes_ * psi;
    const double wp = ap.squaredNorm();
    const double ws = as.squaredNorm();
    if (!(wp + ws > 0.0)) throw NumericalError("quantum jump from a state with no optical quanta");
    psi = (uniform(rng) * (wp + ws) < wp) ? std::move(ap) : std::move(as);
    psi.normalize();
  }

  template <typename Rng>
  static double uniform(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }

  const std::shared_ptr<const KetBasis>& basis() const { return basis_; }

 private:
  std::shared_ptr<const KetBasis> basis_;
  double gamma_;
  Eigen::VectorXi charge_;
  int q_max_ = 0;
  std::vector<Run> runs_;
  Eigen::SparseMatrix<double> a_pump_;
  Eigen::SparseMatrix<double> a_stokes_;
};

std::mt19937_64 realization_rng(std::uint64_t seed, std::size_t index) {
  const auto i = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  return std::mt19937_64(seq);
}

// Runs one realization and hands the normalized state at every grid time to `visit`.
template <typename Visit>
void unravel(const JumpModel& model, const Eigen::VectorXcd& psi0, const std::vector<double>& grid,
             std::mt19937_64& rng, Visit&& visit) {
  Eigen::VectorXcd psi = psi0;
  double t = 0.0;
  double r = 1.0 - JumpModel::uniform(rng);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    while (t < grid[g]) {
      const double horizon = grid[g] - t;
      const double tau = model.jump_time(model.charge_weights(psi), r, horizon);
      if (tau < 0.0) {
        model.propagate(psi, horizon);
        t = grid[g];
      } else {
        model.propagate(psi, tau);
        t = std::min(grid[g], t + tau);
        model.jump(psi, rng);
        r = 1.0 - JumpModel::uniform(rng);
      }
    }
    visit(g, psi / psi.norm());
  }
}

void check_configs(const LindbladConfig& config, const TrajectoryConfig& traj) {
  config.validate();
  if (traj.samples == 0) throw DomainError("trajectory sample count must be positive");
}

}  // namespace

std::vector<TripartiteDensity> trajectory_density(const TripartiteState& initial,
                                                  const LindbladConfig& config,
                                                  const TrajectoryConfig& traj) {
  check_configs(config, traj);
  const auto basis = KetBasis::reachable(initial, config.policy);
  const std::size_t frames = config.gt_grid.size() * kLanes;
  const std::size_t need = lindblad_memory_estimate(basis->size(), frames);
  if (need > config.memory_budget_bytes) {
    throw SizeError("trajectory density accumulators exceed the memory budget", need,
                    config.memory_budget_bytes);
  }
  const JumpModel model(basis, config.gamma, config.coupling_scale);
  Eigen::VectorXcd psi0 = basis->coordinates(initial);
  psi0.normalize();
  const auto d = model.size();
  std::vector<std::vector<Eigen::MatrixXcd>> lanes(
      kLanes, std::vector<Eigen::MatrixXcd>(config.gt_grid.size(), Eigen::MatrixXcd::Zero(d, d)));

  detail::parallel_for(kLanes, traj.threads, [&](std::size_t lane) {
    for (std::size_t s = lane; s < traj.samples; s += kLanes) {
      auto rng = realization_rng(traj.seed, s);
      unravel(model, psi0, config.gt_grid, rng, [&](std::size_t g, const Eigen::VectorXcd& psi) {
        lanes[lane][g].noalias() += psi * psi.adjoint();
      });
    }
  });

  std::vector<TripartiteDensity> out;
  for (std::size_t g = 0; g < config.gt_grid.size(); ++g) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t lane = 0; lane < kLanes; ++lane) rho += lanes[lane][g];
    rho /= static_cast<double>(traj.samples);
    out.push_back({basis, std::move(rho)});
  }
  return out;
}

TrajectoryHerald trajectory_herald(const TripartiteState& initial, const LindbladConfig& config,
                                   const TrajectoryConfig& traj, const HeraldSpec& spec) {
  check_configs(config, traj);
  const auto basis = KetBasis::reachable(initial, config.policy);
  const auto& pol = basis->lattice();
  check_herald_resolved(spec, pol);
  const JumpModel model(basis, config.gamma, config.coupling_scale);
  Eigen::VectorXcd psi0 = basis->coordinates(initial);
  psi0.normalize();

  const bool pump_measured = spec.pump.kind != ModeOutcome::Kind::untouched;
  const bool stokes_measured = spec.stokes.kind != ModeOutcome::Kind::untouched;
  const int nb = pol.phonon_cutoff + 1;
  const int stokes_free = stokes_measured ? 1 : pol.stokes_cutoff + 1;
  const int free_dim = (pump_measured ? 1 : pol.pump_cutoff + 1) * stokes_free;
  std::vector<Eigen::Triplet<Complex>> trip;
  const auto& kets = basis->kets();
  for (std::size_t i = 0; i < kets.size(); ++i) {
    const auto& k = kets[i];
    Complex w{1.0};
    if (pump_measured) w *= spec.pump.overlap(k.pump);
    if (stokes_measured) w *= spec.stokes.overlap(k.stokes);
    if (w == Complex{}) continue;
    const int free = (pump_measured ? 0 : k.pump * stokes_free) + (stokes_measured ? 0 : k.stokes);
    trip.emplace_back(k.phonon + nb * free, static_cast<Eigen::Index>(i), w);
  }
  Eigen::SparseMatrix<Complex> project(static_cast<Eigen::Index>(nb) * free_dim, model.size());
  project.setFromTriplets(trip.begin(), trip.end());

  const std::size_t times = config.gt_grid.size();
  struct Lane {
    std::vector<Eigen::MatrixXcd> rho;
    std::vector<double> w, w2;
  };
  std::vector<Lane> lanes(kLanes, Lane{std::vector<Eigen::MatrixXcd>(times, Eigen::MatrixXcd::Zero(nb, nb)),
                                       std::vector<double>(times, 0.0), std::vector<double>(times, 0.0)});

  detail::parallel_for(kLanes, traj.threads, [&](std::size_t lane) {
    Eigen::VectorXcd c;
    for (std::size_t s = lane; s < traj.samples; s += kLanes) {
      auto rng = realization_rng(traj.seed, s);
      unravel(model, psi0, config.gt_grid, rng, [&](std::size_t g, const Eigen::VectorXcd& psi) {
        c = project * psi;
        const Eigen::Map<const Eigen::MatrixXcd> blocks(c.data(), nb, free_dim);
        const Eigen::MatrixXcd contribution = blocks * blocks.adjoint();
        const double weight = contribution.trace().real();
        lanes[lane].rho[g] += contribution;
        lanes[lane].w[g] += weight;
        lanes[lane].w2[g] += weight * weight;
      });
    }
  });

  TrajectoryHerald out;
  out.gt_grid = config.gt_grid;
  const double n = static_cast<double>(traj.samples);
  for (std::size_t g = 0; g < times; ++g) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(nb, nb);
    double w = 0.0, w2 = 0.0;
    for (const auto& lane : lanes) {
      rho += lane.rho[g];
      w += lane.w[g];
      w2 += lane.w2[g];
    }
    const double mean = w / n;
    const double var = n > 1 ? std::max(0.0, (w2 / n - mean * mean) * n / (n - 1)) : 0.0;
    out.weight.push_back(mean);
    out.weight_error.push_back(std::sqrt(var / n));
    rho /= n;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    if (!(rho.trace().real() > 0.0)) throw HeraldImpossible("herald outcome has zero weight");
    out.states.push_back(PhononState::from_unnormalized(rho));
  }
  return out;
}

}  // namespace tripartite
