#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tripartite/errors.hpp"
#include "tripartite/measurement.hpp"

using namespace tripartite;
using testing_support::policy;

TEST(Herald, PhotonCountMatchesTwoTermForm) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> amp(0.05, 1.5), phase(0.0, 2.0 * std::numbers::pi), time(0.05, 6.0);
  const HeraldSpec spec{ModeOutcome::count(1), ModeOutcome::count(1)};
  for (int trial = 0; trial < 100; ++trial) {
    const Complex ap = std::polar(amp(rng), phase(rng));
    const Complex as = std::polar(amp(rng), phase(rng));
    const double t = time(rng);
    const InitialSpec init{ModeInit::coherent(ap), ModeInit::coherent(as)};
    const auto pol = policy(14, 18, 14);
    const auto state = evolve_to(initial_amplitudes(init, pol), t);
    const auto ph = herald(state, spec);
    // N [a_S cos(sqrt2 t)|0> - i a_p/sqrt6 sin(sqrt6 t)|1>], N = a_p P0 S0
    const Complex n = ap * std::exp(-0.5 * (std::norm(ap) + std::norm(as)));
    Eigen::VectorXcd ref = Eigen::VectorXcd::Zero(ph.dimension());
    ref(0) = n * as * std::cos(std::sqrt(2.0) * t);
    ref(1) = -Complex(0.0, 1.0) * n * ap / std::sqrt(6.0) * std::sin(std::sqrt(6.0) * t);
    const auto& c = ph.amplitudes();
    ASSERT_NEAR(ph.raw_norm(), ref.squaredNorm(), 1e-12 * std::max(1.0, ref.squaredNorm()));
    EXPECT_LT((c * std::sqrt(ph.raw_norm()) - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Herald, NoStokesLightGivesSinglePhonon) {
  const HeraldSpec spec{ModeOutcome::count(1), ModeOutcome::count(1)};
  const InitialSpec init{ModeInit::coherent({0.9, 0.2}), ModeInit::vacuum()};
  const auto pol = policy(10, 10, 10);
  const auto psi0 = initial_amplitudes(init, pol);
  for (double t : {0.2, 0.9, 1.7, 2.4}) {
    const auto ph = herald(evolve_to(psi0, t), spec);
    ASSERT_GT(ph.raw_norm(), 0.0);
    EXPECT_NEAR(fidelity(ph, fock_phonon(1, ph.dimension())), 1.0, 1e-12);
  }
}

TEST(Herald, HomodyneAmplitudes) {
  const InitialSpec init{ModeInit::coherent(0.5), ModeInit::coherent(1.2)};
  const auto pol = policy(8, 16, 8);
  const auto s = evolve_to(initial_amplitudes(init, pol), 1.3);
  const Complex bp{0.2, 0.1}, bs{0.4, -1.0};
  const auto ph = herald(s, {ModeOutcome::homodyne(bp), ModeOutcome::homodyne(bs)});
  // Direct sum of <beta|n> amplitudes.
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(pol.phonon_cutoff + 1);
  for (int p = 0; p <= pol.pump_cutoff; ++p) {
    for (int q = 0; q <= pol.stokes_cutoff; ++q) {
      for (int k = 0; k <= pol.phonon_cutoff; ++k) {
        c(k) += std::conj(coherent_amplitude(bp, p)) * std::conj(coherent_amplitude(bs, q)) * s.at(p, q, k);
      }
    }
  }
  EXPECT_NEAR(ph.raw_norm(), c.squaredNorm(), 1e-14);
  EXPECT_LT((ph.amplitudes() * std::sqrt(ph.raw_norm()) - c).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(std::abs(ModeOutcome::homodyne(bp).overlap(3) - std::conj(coherent_amplitude(bp, 3))), 0.0, 1e-15);
}

TEST(Herald, UntouchedModeIsTraced) {
  std::mt19937_64 rng(4);
  const auto s = testing_support::random_state(policy(3, 3, 3), rng);
  const auto mixed = herald(s, {ModeOutcome::count(1), ModeOutcome::untouched()});
  EXPECT_EQ(mixed.kind(), PhononState::Kind::mixed);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(4, 4);
  for (int q = 0; q <= 3; ++q) {
    for (int k = 0; k <= 3; ++k) {
      for (int l = 0; l <= 3; ++l) rho(k, l) += s.at(1, q, k) * std::conj(s.at(1, q, l));
    }
  }
  EXPECT_NEAR(mixed.raw_norm(), rho.trace().real(), 1e-14);
  EXPECT_LT((mixed.density() * mixed.raw_norm() - rho).cwiseAbs().maxCoeff(), 1e-14);
  const auto none = herald(s, {});
  EXPECT_LT((none.density() - partial_trace_phonon(s).density()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Herald, UnresolvedOutcomesRejected) {
  const auto s = make_fock_state({1, 1, 0}, policy(2, 2, 2));
  EXPECT_THROW(herald(s, {ModeOutcome::homodyne(3.0), ModeOutcome::untouched()}), TruncationError);
  EXPECT_THROW(herald(s, {ModeOutcome::count(-1), ModeOutcome::untouched()}), DomainError);
  EXPECT_THROW(herald(s, {ModeOutcome::count(2), ModeOutcome::count(0)}), HeraldImpossible);
}

TEST(ReducedDensity, MatchesPartialTrace) {
  const InitialSpec init{ModeInit::coherent(2.4), ModeInit::coherent(0.25)};
  const auto pol = policy(17, 19, 17);
  const auto psi0 = initial_amplitudes(init, pol);
  for (double t : {0.4, 1.5, 3.2}) {
    const auto formula = reduced_density_matrix(init, pol, t);
    const auto traced = partial_trace_phonon(evolve_to(psi0, t));
    EXPECT_LT((formula.density() - traced.density()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(formula.raw_norm(), traced.trace(), 1e-10);
  }
}

TEST(LinearEntropy, SinglePhotonStokesVacuum) {
  const InitialSpec init{ModeInit::fock(1), ModeInit::vacuum()};
  const auto pol = policy(1, 1, 1);
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(0.05 * i);
  const auto scaled = linear_entropy(init, pol, grid);
  const auto raw = linear_entropy(init, pol, grid, EntropyScale::unscaled);
  EXPECT_EQ(scaled.scale_factor, 2.0);
  EXPECT_EQ(raw.scale_factor, 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s2 = std::pow(std::sin(2.0 * grid[i]), 2);
    EXPECT_NEAR(raw.values[i], 0.5 * s2, 1e-10);
    EXPECT_NEAR(scaled.values[i], s2, 1e-10);
  }
}

TEST(LinearEntropy, BoundsForCoherentInput) {
  const InitialSpec init{ModeInit::coherent(1.0), ModeInit::coherent(4.6)};
  const auto pol = policy(6, 46, 6);
  std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 5.0};
  const auto tr = linear_entropy(init, pol, grid);
  EXPECT_EQ(tr.scale_factor, 1.0);
  EXPECT_NEAR(tr.values[0], 0.0, 1e-12);
  for (double v : tr.values) {
    EXPECT_GE(v, -1e-12);
    EXPECT_LE(v, 1.0 - 1.0 / (pol.phonon_cutoff + 1) + 1e-12);
  }
  EXPECT_GT(*std::max_element(tr.values.begin(), tr.values.end()), 0.05);
}

TEST(Fidelity, PureMixedAndSuperposition) {
  Eigen::VectorXcd v(4);
  v << 0.0, 0.0, std::sqrt(0.5), Complex(0.0, std::sqrt(0.5));
  const auto psi = PhononState::pure(v);
  const auto opt = superposition_fidelity(psi, 2, 3);
  EXPECT_NEAR(opt.fidelity, 1.0, 1e-14);
  EXPECT_NEAR(opt.phase, 0.5 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(fidelity(psi, fock_phonon(2, 4)), 0.5, 1e-14);
  // Dephased version: (rho_22 + rho_33)/2 + |rho_23| = 1/2
  Eigen::MatrixXcd rho = psi.density();
  rho(2, 3) = rho(3, 2) = 0.0;
  const auto deph = PhononState::mixed(rho);
  EXPECT_NEAR(superposition_fidelity(deph, 2, 3).fidelity, 0.5, 1e-14);
  EXPECT_NEAR(fidelity(deph, psi), 0.5, 1e-12);
  // Uhlmann between two mixed states: identical inputs give 1.
  EXPECT_NEAR(fidelity(deph, deph), 1.0, 1e-10);
  EXPECT_THROW(fidelity(psi, fock_phonon(1, 3)), DimensionMismatch);
}
