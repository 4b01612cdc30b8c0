#include "tripartite/open_system.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <string>

#include <Eigen/Sparse>

#include "tripartite/errors.hpp"

namespace tripartite {

KetBasis::KetBasis(TruncationPolicy lattice, std::vector<ModeIndex> kets)
    : lattice_(lattice), kets_(std::move(kets)) {
  for (std::size_t i = 0; i < kets_.size(); ++i) {
    const auto& k = kets_[i];
    if (k.pump < 0 || k.stokes < 0 || k.phonon < 0 || k.pump > lattice_.pump_cutoff ||
        k.stokes > lattice_.stokes_cutoff || k.phonon > lattice_.phonon_cutoff) {
      throw CutoffViolation("basis ket outside its lattice");
    }
    if (!index_.emplace(k, i).second) throw DomainError("duplicate ket in basis");
  }
}

std::ptrdiff_t KetBasis::find(const ModeIndex& idx) const {
  const auto it = index_.find(idx);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Eigen::VectorXcd KetBasis::coordinates(const TripartiteState& state) const {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(kets_.size()));
  for (std::size_t i = 0; i < kets_.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = state.contains(kets_[i]) ? state.at(kets_[i]) : Complex{};
  }
  return v;
}

namespace {

bool in_lattice(const ModeIndex& k, const TruncationPolicy& pol) {
  return k.pump >= 0 && k.stokes >= 0 && k.phonon >= 0 && k.pump <= pol.pump_cutoff &&
         k.stokes <= pol.stokes_cutoff && k.phonon <= pol.phonon_cutoff;
}

std::vector<ModeIndex> nonzero_kets(const TripartiteState& state) {
  std::vector<ModeIndex> out;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (amps[i] != Complex{}) out.push_back(state.mode(i));
  }
  return out;
}

}  // namespace

std::shared_ptr<const KetBasis> KetBasis::reachable(const TripartiteState& state,
                                                    const TruncationPolicy& lattice) {
  lattice.validate();
  std::set<ModeIndex> seen;
  std::deque<ModeIndex> queue;
  for (const auto& k : nonzero_kets(state)) {
    if (!in_lattice(k, lattice)) {
      throw CutoffViolation("initial state has weight outside the open-system lattice");
    }
    if (seen.insert(k).second) queue.push_back(k);
  }
  if (seen.empty()) throw DomainError("initial state is zero");
  static constexpr int moves[4][3] = {{-1, 1, 1}, {1, -1, -1}, {-1, 0, 0}, {0, -1, 0}};
  while (!queue.empty()) {
    const ModeIndex k = queue.front();
    queue.pop_front();
    for (const auto& mv : moves) {
      const ModeIndex n{k.pump + mv[0], k.stokes + mv[1], k.phonon + mv[2]};
      if (in_lattice(n, lattice) && seen.insert(n).second) queue.push_back(n);
    }
  }
  return std::make_shared<const KetBasis>(lattice, std::vector<ModeIndex>(seen.begin(), seen.end()));
}

std::shared_ptr<const KetBasis> KetBasis::support(const TripartiteState& state) {
  auto kets = nonzero_kets(state);
  if (kets.empty()) throw DomainError("state is zero");
  return std::make_shared<const KetBasis>(state.policy(), std::move(kets));
}

TripartiteDensity TripartiteDensity::from_state(const TripartiteState& state) {
  auto basis = KetBasis::support(state);
  const Eigen::VectorXcd v = basis->coordinates(state);
  return {std::move(basis), v * v.adjoint()};
}

double TripartiteDensity::overlap(const TripartiteState& psi) const {
  const Eigen::VectorXcd v = basis->coordinates(psi);
  return v.dot(rho * v).real();
}

namespace {

// Partial trace keeping one mode: `keep` picks the retained index of a ket,
// `rest` the pair identifying the traced modes.
template <typename Keep, typename Rest>
Eigen::MatrixXcd reduce(const TripartiteDensity& d, int dim, Keep keep, Rest rest) {
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  const auto& kets = d.basis->kets();
  for (std::size_t i = 0; i < kets.size(); ++i) groups[rest(kets[i])].push_back(i);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [key, members] : groups) {
    for (std::size_t i : members) {
      for (std::size_t j : members) {
        out(keep(kets[i]), keep(kets[j])) +=
            d.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd TripartiteDensity::reduced_pump() const {
  return reduce(*this, basis->lattice().pump_cutoff + 1, [](const ModeIndex& k) { return k.pump; },
                [](const ModeIndex& k) { return std::make_pair(k.stokes, k.phonon); });
}

Eigen::MatrixXcd TripartiteDensity::reduced_stokes() const {
  return reduce(*this, basis->lattice().stokes_cutoff + 1, [](const ModeIndex& k) { return k.stokes; },
                [](const ModeIndex& k) { return std::make_pair(k.pump, k.phonon); });
}

Eigen::MatrixXcd TripartiteDensity::reduced_phonon() const {
  return reduce(*this, basis->lattice().phonon_cutoff + 1, [](const ModeIndex& k) { return k.phonon; },
                [](const ModeIndex& k) { return std::make_pair(k.pump, k.stokes); });
}

void LindbladConfig::validate() const {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be >= 0");
  if (!(coupling_scale >= 0.0) || !std::isfinite(coupling_scale)) {
    throw DomainError("coupling scale must be >= 0");
  }
  if (!(integrator_tolerance > 0.0) || !(absolute_tolerance > 0.0)) {
    throw DomainError("integrator tolerances must be positive");
  }
  if (gt_grid.empty()) throw DomainError("gt grid is empty");
  for (std::size_t i = 0; i < gt_grid.size(); ++i) {
    if (!std::isfinite(gt_grid[i]) || gt_grid[i] < 0.0) throw DomainError("gt grid values must be finite and >= 0");
    if (i > 0 && gt_grid[i] < gt_grid[i - 1]) throw DomainError("gt grid must be non-decreasing");
  }
  policy.validate();
}

std::size_t lindblad_memory_estimate(std::size_t kets, std::size_t stored_frames) {
  const double per_matrix = static_cast<double>(kets) * static_cast<double>(kets) * sizeof(Complex);
  const double total = per_matrix * static_cast<double>(10 + stored_frames);
  return total >= static_cast<double>(std::numeric_limits<std::size_t>::max())
             ? std::numeric_limits<std::size_t>::max()
             : static_cast<std::size_t>(total);
}

namespace {

using SparseReal = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Liouvillian {
  SparseReal h;
  SparseReal a_pump;
  SparseReal a_stokes;
  SparseReal a_pump_t;
  SparseReal a_stokes_t;
  Eigen::VectorXd charge;  // n_p + n_S
  double gamma = 0.0;
  mutable Eigen::MatrixXcd scratch;

  // Derivative of the damping-frame matrix at elapsed frame time tau.
  void rhs(double tau, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) const {
    scratch.noalias() = h * y;
    dy = Complex{0.0, -1.0} * scratch;
    dy += Complex{0.0, 1.0} * scratch.adjoint();
    if (gamma > 0.0) {
      const double c = gamma * std::exp(-gamma * tau);
      scratch.noalias() = a_pump * y;
      dy.noalias() += c * (scratch * a_pump_t);
      scratch.noalias() = a_stokes * y;
      dy.noalias() += c * (scratch * a_stokes_t);
    }
  }
};

Liouvillian build_liouvillian(const KetBasis& basis, double gamma, double coupling) {
  const auto& kets = basis.kets();
  const auto d = static_cast<Eigen::Index>(kets.size());
  std::vector<Eigen::Triplet<double>> th, tp, ts;
  Eigen::VectorXd charge(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& k = kets[static_cast<std::size_t>(i)];
    charge(i) = k.pump + k.stokes;
    // <k| a_p a_S^+ b^+ |src>, src = (p+1, s-1, b-1)
    if (coupling > 0.0 && k.stokes > 0 && k.phonon > 0) {
      const auto j = basis.find({k.pump + 1, k.stokes - 1, k.phonon - 1});
      if (j >= 0) {
        const double v = coupling * std::sqrt((k.pump + 1.0) * k.stokes * static_cast<double>(k.phonon));
        th.emplace_back(i, j, v);
        th.emplace_back(j, i, v);
      }
    }
    const auto jp = basis.find({k.pump + 1, k.stokes, k.phonon});
    if (jp >= 0) tp.emplace_back(i, jp, std::sqrt(k.pump + 1.0));
    const auto js = basis.find({k.pump, k.stokes + 1, k.phonon});
    if (js >= 0) ts.emplace_back(i, js, std::sqrt(k.stokes + 1.0));
  }
  Liouvillian l;
  l.h.resize(d, d);
  l.h.setFromTriplets(th.begin(), th.end());
  l.a_pump.resize(d, d);
  l.a_pump.setFromTriplets(tp.begin(), tp.end());
  l.a_stokes.resize(d, d);
  l.a_stokes.setFromTriplets(ts.begin(), ts.end());
  l.a_pump_t = l.a_pump.transpose();
  l.a_stokes_t = l.a_stokes.transpose();
  l.charge = std::move(charge);
  l.gamma = gamma;
  return l;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class DampedIntegrator {
 public:
  DampedIntegrator(const Liouvillian& l, Eigen::MatrixXcd rho0, double rtol, double atol)
      : l_(l), rtol_(rtol), atol_(atol), y_(std::move(rho0)) {
    const auto d = y_.rows();
    for (auto* m : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_}) m->resize(d, d);
    q_max_ = l_.charge.size() > 0 ? l_.charge.maxCoeff() : 0.0;
    const double hn = l_.h.size() > 0 ? l_.h.cwiseAbs().toDense().rowwise().sum().maxCoeff() : 0.0;
    h_ = 0.05 / std::max({1.0, hn, l_.gamma * std::max(1.0, q_max_)});
  }

  /// Advances to absolute time `t_end` and returns the physical density matrix.
  Eigen::MatrixXcd advance_to(double t_end) {
    while (t_ < t_end) {
      if (!k1_valid_) {
        l_.rhs(t_ - t0_, y_, k1_);
        k1_valid_ = true;
      }
      double h = std::min(h_, t_end - t_);
      const bool hits_end = h == t_end - t_;
      const double err = attempt(h);
      if (err <= 1.0) {
        t_ = hits_end ? t_end : t_ + h;
        y_.swap(tmp_);
        k1_.swap(k7_);
        ++accepted_;
        if (l_.gamma * (t_ - t0_) * q_max_ > 40.0) rebase();
      } else {
        ++rejected_;
      }
      const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      const double proposal = h * (err <= 1.0 ? factor : std::min(1.0, factor));
      if (err <= 1.0 && hits_end) {
        h_ = std::max(h_, proposal);
      } else {
        h_ = proposal;
      }
      if (h_ < 1e-13 * std::max(1.0, t_)) {
        throw StiffnessError("integrator step size collapsed at gt = " + std::to_string(t_),
                             l_.gamma * h_);
      }
    }
    rebase();
    return y_;
  }

  std::size_t accepted() const { return accepted_; }
  std::size_t rejected() const { return rejected_; }

 private:
  // Folds the damping frame into y so that it holds the physical density matrix.
  void rebase() {
    if (t_ != t0_ && l_.gamma > 0.0) {
      const Eigen::VectorXd w = (-0.5 * l_.gamma * (t_ - t0_) * l_.charge.array()).exp().matrix();
      y_ = w.asDiagonal() * y_ * w.asDiagonal();
      k1_valid_ = false;
    }
    t0_ = t_;
    tmp_ = 0.5 * (y_ + y_.adjoint());
    y_.swap(tmp_);
  }

  double attempt(double h) {
    const double tau = t_ - t0_;
    tmp_ = y_ + h * a21 * k1_;
    l_.rhs(tau + c2 * h, tmp_, k2_);
    tmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
    l_.rhs(tau + c3 * h, tmp_, k3_);
    tmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    l_.rhs(tau + c4 * h, tmp_, k4_);
    tmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    l_.rhs(tau + c5 * h, tmp_, k5_);
    tmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    l_.rhs(tau + h, tmp_, k6_);
    tmp_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    l_.rhs(tau + h, tmp_, k7_);

    // Max-norm error measured in physical units: a frame entry is the physical
    // one times exp(gamma tau (q_i + q_j)/2).
    const Eigen::VectorXd w = (0.5 * l_.gamma * (tau + h) * l_.charge.array()).exp().matrix();
    double err = 0.0;
    for (Eigen::Index j = 0; j < y_.cols(); ++j) {
      const Eigen::ArrayXd e = (h * (e1 * k1_.col(j) + e3 * k3_.col(j) + e4 * k4_.col(j) + e5 * k5_.col(j) +
                                     e6 * k6_.col(j) + e7 * k7_.col(j)))
                                   .array()
                                   .abs2()
                                   .sqrt();
      const Eigen::ArrayXd mag =
          y_.col(j).array().abs2().max(tmp_.col(j).array().abs2()).sqrt();
      const Eigen::ArrayXd scale = (atol_ * w(j)) * w.array() + rtol_ * mag;
      err = std::max(err, (e / scale).maxCoeff());
    }
    if (!std::isfinite(err)) return std::numeric_limits<double>::infinity();
    return err;
  }

  const Liouvillian& l_;
  double rtol_;
  double atol_;
  Eigen::MatrixXcd y_;
  Eigen::MatrixXcd k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_;
  bool k1_valid_ = false;
  double t_ = 0.0;
  double t0_ = 0.0;
  double h_ = 0.0;
  double q_max_ = 0.0;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

IntegrationStats run(const TripartiteState& initial, const LindbladConfig& config,
                     std::size_t stored_frames, const DensityObserver& observer) {
  config.validate();
  const auto basis = KetBasis::reachable(initial, config.policy);
  const std::size_t need = lindblad_memory_estimate(basis->size(), stored_frames);
  if (need > config.memory_budget_bytes) {
    throw SizeError("open-system working set of " + std::to_string(basis->size()) + " kets needs " +
                        std::to_string(need >> 20) + " MiB, budget is " +
                        std::to_string(config.memory_budget_bytes >> 20) + " MiB",
                    need, config.memory_budget_bytes);
  }
  const Liouvillian l = build_liouvillian(*basis, config.gamma, config.coupling_scale);
  Eigen::VectorXcd v = basis->coordinates(initial);
  v.normalize();
  DampedIntegrator integrator(l, v * v.adjoint(), config.integrator_tolerance, config.absolute_tolerance);
  for (std::size_t i = 0; i < config.gt_grid.size(); ++i) {
    observer(i, TripartiteDensity{basis, integrator.advance_to(config.gt_grid[i])});
  }
  return {integrator.accepted(), integrator.rejected(), basis->size()};
}

}  // namespace

IntegrationStats lindblad_evolve(const TripartiteState& initial, const LindbladConfig& config,
                                 const DensityObserver& observer) {
  return run(initial, config, 0, observer);
}

DensityTrajectory lindblad_evolve(const TripartiteState& initial, const LindbladConfig& config) {
  DensityTrajectory out;
  out.gt_grid = config.gt_grid;
  out.states.reserve(config.gt_grid.size());
  const auto stats = run(initial, config, config.gt_grid.size(),
                         [&](std::size_t, const TripartiteDensity& d) { out.states.push_back(d); });
  out.steps_accepted = stats.steps_accepted;
  out.steps_rejected = stats.steps_rejected;
  return out;
}

PhononState herald_from_density(const TripartiteDensity& density, const HeraldSpec& spec) {
  const auto& pol = density.basis->lattice();
  check_herald_resolved(spec, pol);
  const bool pump_measured = spec.pump.kind != ModeOutcome::Kind::untouched;
  const bool stokes_measured = spec.stokes.kind != ModeOutcome::Kind::untouched;
  if (!pump_measured && !stokes_measured) {
    const Eigen::MatrixXcd rho = density.reduced_phonon();
    if (!(rho.trace().real() > 0.0)) throw HeraldImpossible("herald outcome has zero weight");
    return PhononState::from_unnormalized(rho);
  }
  const int nb = pol.phonon_cutoff + 1;
  const int free_dim = (pump_measured ? 1 : pol.pump_cutoff + 1) * (stokes_measured ? 1 : pol.stokes_cutoff + 1);

  // Row (free, b) of W carries <outcome|n_p, n_S> for every ket.
  const auto& kets = density.basis->kets();
  std::vector<Eigen::Triplet<Complex>> trip;
  for (std::size_t i = 0; i < kets.size(); ++i) {
    const auto& k = kets[i];
    Complex w{1.0};
    if (pump_measured) w *= spec.pump.overlap(k.pump);
    if (stokes_measured) w *= spec.stokes.overlap(k.stokes);
    if (w == Complex{}) continue;
    const int free = (pump_measured ? 0 : k.pump * (stokes_measured ? 1 : pol.stokes_cutoff + 1)) +
                     (stokes_measured ? 0 : k.stokes);
    trip.emplace_back(free * nb + k.phonon, static_cast<Eigen::Index>(i), w);
  }
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> w(static_cast<Eigen::Index>(free_dim) * nb,
                                                  static_cast<Eigen::Index>(kets.size()));
  w.setFromTriplets(trip.begin(), trip.end());
  const Eigen::MatrixXcd wr = w * density.rho;
  const Eigen::SparseMatrix<Complex, Eigen::RowMajor> wa = w.adjoint();
  const Eigen::MatrixXcd full = wr * wa;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(nb, nb);
  for (int f = 0; f < free_dim; ++f) rho += full.block(f * nb, f * nb, nb, nb);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  if (!(rho.trace().real() > 0.0)) throw HeraldImpossible("herald outcome has zero weight");
  return PhononState::from_unnormalized(rho);
}

}  // namespace tripartite
