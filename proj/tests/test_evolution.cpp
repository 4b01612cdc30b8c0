#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "support.hpp"
#include "tripartite/errors.hpp"
#include "tripartite/evolution.hpp"

using namespace tripartite;
using testing_support::policy;

TEST(Evolution, MatchesDenseExponential) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pick_t(0.0, 5.0);
  const auto pol = policy(4, 6, 4);
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto psi0 = testing_support::random_state(pol, rng);
    for (int i = 0; i < 10; ++i) {
      const double t = pick_t(rng);
      // Compare on the kets whose sectors fit inside the lattice.
      const auto exact = evolve_to(psi0, t);
      const auto brute = brute_force_evolve(psi0, t);
      worst = std::max(worst, testing_support::infidelity(exact, brute));
    }
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(worst, 1e-8);
  EXPECT_LT(elapsed, 30.0);
}

TEST(Evolution, ConservedCharges) {
  InitialSpec spec{ModeInit::coherent({1.1, 0.3}), ModeInit::coherent({0.0, 2.0})};
  const auto pol = policy(8, 14, 8);
  const auto psi0 = initial_amplitudes(spec, pol);
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(0.25 * i);
  const auto r = evolve(psi0, grid);
  const double n0 = norm_squared(psi0);
  const auto q1 = charge_distribution(psi0, Charge::pump_plus_phonon);
  const auto q2 = charge_distribution(psi0, Charge::stokes_minus_phonon);
  const auto q3 = charge_distribution(psi0, Charge::pump_plus_stokes);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& s = r.states[i];
    EXPECT_NEAR(norm_squared(s) + r.discarded_norm[i], n0, 1e-10);
    for (auto [charge, ref] : {std::pair{Charge::pump_plus_phonon, &q1}, std::pair{Charge::stokes_minus_phonon, &q2},
                               std::pair{Charge::pump_plus_stokes, &q3}}) {
      const auto d = charge_distribution(s, charge);
      double total_ref = 0.0, total = 0.0;
      for (auto [q, p] : *ref) total_ref += p;
      for (auto [q, p] : d) total += p;
      // Leakage off the lattice is the only change, and it is reported.
      EXPECT_NEAR(total + r.discarded_norm[i], total_ref, 1e-10);
      if (r.discarded_norm[i] < 1e-14) {
        for (auto [q, p] : *ref) EXPECT_NEAR(d.count(q) ? d.at(q) : 0.0, p, 1e-10);
      }
    }
  }
}

TEST(Evolution, ClosedLatticeConservesExactly) {
  // Seeded without phonons, a sector never exceeds the initial pump number in
  // n_p or n_b, nor n_S + n_p in the Stokes mode.
  std::mt19937_64 rng(9);
  auto psi = testing_support::random_state(policy(3, 3, 0), rng);
  psi = embed(psi, policy(3, 6, 3));
  for (double t : {0.5, 3.0, 10.0}) {
    const auto r = evolve(psi, std::vector<double>{t});
    EXPECT_LT(r.discarded_norm[0], 1e-14);
    EXPECT_NEAR(norm_squared(r.states[0]), 1.0, 1e-12);
    const auto a = charge_distribution(psi, Charge::pump_plus_phonon);
    const auto b = charge_distribution(r.states[0], Charge::pump_plus_phonon);
    for (auto [q, p] : a) EXPECT_NEAR(b.at(q), p, 1e-10);
  }
}

TEST(Evolution, SinglePhotonRabiOscillation) {
  for (int m : {0, 5}) {
    const auto pol = policy(1, m + 1, 1);
    const auto psi0 = make_fock_state({1, m, 0}, pol);
    for (double t : {0.1, 0.77, 2.5, 9.3}) {
      const auto s = evolve_to(psi0, t);
      const double w = std::sqrt(m + 1.0) * t;
      EXPECT_NEAR(std::norm(s.at(1, m, 0)), std::pow(std::cos(w), 2), 1e-12);
      EXPECT_NEAR(std::norm(s.at(0, m + 1, 1)), std::pow(std::sin(w), 2), 1e-12);
    }
  }
}

TEST(Evolution, SinglePumpPhotonFormula) {
  const auto pol = policy(1, 30, 1);
  const auto stokes = ModeInit::coherent({0.0, 2.2});
  const InitialSpec spec{ModeInit::fock(1), stokes};
  const auto psi0 = initial_amplitudes(spec, pol);
  for (double t : {0.3, 1.7, 4.0}) {
    const auto formula = single_pump_photon_state(stokes, t, pol);
    EXPECT_LT(testing_support::max_abs_diff(formula, evolve_to(psi0, t)), 1e-12);
  }
}

TEST(Evolution, WeakCoherentLimit) {
  const Complex ap{0.01, 0.0}, as{0.0, 0.01};
  const auto pol = policy(3, 5, 3);
  const InitialSpec spec{ModeInit::coherent(ap), ModeInit::coherent(as)};
  const double t = 1.1;
  const auto exact = evolve_to(initial_amplitudes(spec, pol), t);
  // Overall factor e^{-(|ap|^2+|as|^2)/2} and second-order terms differ.
  const auto approx = weak_coherent_state(ap, as, t, pol);
  EXPECT_LT(testing_support::max_abs_diff(exact, approx), 3e-4);
  EXPECT_NEAR(std::abs(approx.at(0, 1, 1) - Complex(0.0, -0.01 * std::sin(t))), 0.0, 1e-15);
}

TEST(Evolution, InitialStateAndTruncation) {
  const InitialSpec spec{ModeInit::coherent(0.74), ModeInit::coherent(5.6)};
  EXPECT_THROW(check_truncation(spec, policy(6, 10, 6)), TruncationError);
  try {
    check_truncation(spec, policy(6, 10, 6));
  } catch (const TruncationError& e) {
    EXPECT_EQ(e.mode(), "stokes");
    EXPECT_EQ(e.required_cutoff(), ModeInit::coherent(5.6).required_cutoff(1e-4));
  }
  const auto pol = policy(6, 60, 6);
  EXPECT_NO_THROW(check_truncation(spec, pol));
  const auto psi = initial_amplitudes(spec, pol);
  EXPECT_NEAR(std::abs(psi.at(1, 2, 0) - coherent_amplitude(0.74, 1) * coherent_amplitude(5.6, 2)), 0.0, 1e-15);
  EXPECT_EQ(psi.at(1, 2, 1), Complex(0.0));
  EXPECT_THROW(evolve_to(convert_frame(psi, Frame::schrodinger, {1.0, 1.0, 1.0}, 0.1), 1.0), DomainError);
  EXPECT_THROW(evolve_to(make_fock_state({2, 0, 0}, policy(2, 2, 1)), 1.0), CutoffViolation);
}

TEST(Evolution, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(1);
  const auto psi = testing_support::random_state(policy(2, 4, 2), rng);
  EXPECT_LT(testing_support::max_abs_diff(evolve_to(psi, 0.0), psi), 1e-14);
}
