#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tripartite/errors.hpp"
#include "tripartite/evolution.hpp"
#include "tripartite/pulse_protocols.hpp"

using namespace tripartite;

TEST(Pulse, Durations) {
  PulsePlan plan;
  plan.alpha_s = {0.0, 8.0};
  EXPECT_NEAR(plan.duration(), std::numbers::pi / 16.0, 1e-15);
  plan.pulse = PulsePlan::Pulse::pi_over_2;
  EXPECT_NEAR(plan.duration(), std::numbers::pi / 32.0, 1e-15);
  plan.pulse = PulsePlan::Pulse::custom;
  plan.custom_gt = 0.3;
  EXPECT_EQ(plan.duration(), 0.3);
  plan.c0 = 1.0;
  plan.c1 = 1.0;
  EXPECT_THROW(plan.validate(), DomainError);
}

TEST(Pulse, ClosedFormMatchesExactEvolution) {
  PulsePlan plan;
  plan.alpha_s = std::polar(4.0, 0.3);
  plan.c0 = 0.6;
  plan.c1 = Complex(0.0, 0.8);
  const auto pol = swap_policy(plan.alpha_s);
  EXPECT_EQ(pol.pump_cutoff, 1);
  EXPECT_EQ(pol.phonon_cutoff, 1);
  for (auto pulse : {PulsePlan::Pulse::pi, PulsePlan::Pulse::pi_over_2}) {
    plan.pulse = pulse;
    const auto exact = exact_swap_evolution(plan, pol);
    const auto closed = swap_closed_form(plan, pol);
    EXPECT_LT(testing_support::max_abs_diff(exact, closed), 1e-12);
  }
}

TEST(Pulse, SwapAndBellImproveWithStokesAmplitude) {
  double prev_swap = 1.0, prev_bell = 1.0;
  for (double a : {4.0, 8.0, 16.0}) {
    PulsePlan plan;
    plan.alpha_s = {0.0, a};
    plan.c0 = 0.0;
    plan.c1 = 1.0;
    const double swap = 1.0 - swap_fidelity(plan);
    const double bell = bell_state_residual(plan.alpha_s);
    EXPECT_LT(swap, prev_swap);
    EXPECT_LT(bell, prev_bell);
    // Var(sqrt(m)) -> 1/4 for Poisson m, so the pulse-area error gives pi^2 / (16 a^2).
    EXPECT_NEAR(swap * a * a, M_PI * M_PI / 16.0, 0.06);
    EXPECT_LT(bell, 0.1 / (a * a));
    prev_swap = swap;
    prev_bell = bell;
  }
}

TEST(Pulse, TwoHalfPulsesComposeToOne) {
  for (double a : {4.0, 8.0, 16.0}) {
    PulsePlan plan;
    plan.alpha_s = {0.0, a};
    plan.c0 = 0.6;
    plan.c1 = 0.8;
    const auto pol = swap_policy(plan.alpha_s);
    auto half = plan;
    half.pulse = PulsePlan::Pulse::pi_over_2;
    const auto once = exact_swap_evolution(half, pol);
    const auto twice = evolve_to(once, half.duration());
    const double f_composed = swap_fidelity(twice, plan);
    const double f_single = swap_fidelity(plan);
    EXPECT_NEAR(f_composed, f_single, 1e-10);
    EXPECT_LT(1.0 - f_composed, 0.5 / (a * a));
  }
}

TEST(Pulse, IdealTargets) {
  PulsePlan plan;
  plan.alpha_s = {0.0, 5.0};
  plan.c0 = 0.6;
  plan.c1 = 0.8;
  const auto pump = ideal_swapped_pump(plan, 2);
  EXPECT_NEAR(std::abs(pump(0) - 0.6), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pump(1) - 0.8), 0.0, 1e-15);
  const auto bell = ideal_bell_state({0.0, 5.0}, 2, 2);
  // (|0,1> + |1,0>)/sqrt2 for phi = pi/2; index n_p * 2 + n_b.
  EXPECT_NEAR(std::abs(bell(1) - std::sqrt(0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(bell(2) - std::sqrt(0.5)), 0.0, 1e-15);
}

TEST(Pulse, SweepIsThreadIndependent) {
  const std::vector<Complex> alphas{{0.0, 3.0}, {0.0, 6.0}, {0.0, 9.0}};
  const auto a = swap_sweep(alphas, 0.0, 1.0, 1);
  const auto b = swap_sweep(alphas, 0.0, 1.0, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].swap_infidelity, b[i].swap_infidelity);
    EXPECT_EQ(a[i].bell_residual, b[i].bell_residual);
    EXPECT_NEAR(a[i].t_pi, std::numbers::pi / (2.0 * std::abs(alphas[i])), 1e-15);
  }
}
