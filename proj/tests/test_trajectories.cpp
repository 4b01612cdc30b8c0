#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "tripartite/trajectories.hpp"

using namespace tripartite;
using testing_support::policy;

namespace {

LindbladConfig small_config() {
  LindbladConfig c;
  c.gamma = 0.6;
  c.gt_grid = {0.4, 1.2, 2.0};
  c.policy = policy(5, 9, 5);
  c.integrator_tolerance = 1e-9;
  c.absolute_tolerance = 1e-12;
  return c;
}

TripartiteState small_initial(const TruncationPolicy& pol) {
  return initial_amplitudes({ModeInit::coherent(0.8), ModeInit::coherent({0.0, 0.9})}, pol).normalized();
}

}  // namespace

TEST(Trajectories, AverageMatchesMasterEquation) {
  const auto cfg = small_config();
  const auto psi0 = small_initial(cfg.policy);
  const auto me = lindblad_evolve(psi0, cfg);
  const auto mc = trajectory_density(psi0, cfg, {4000, 7, 1});
  ASSERT_EQ(mc.size(), cfg.gt_grid.size());
  for (std::size_t i = 0; i < mc.size(); ++i) {
    EXPECT_NEAR(mc[i].trace(), 1.0, 1e-10);
    // Map the trajectory basis onto the ME basis and compare phonon marginals
    // and pump populations; statistical error ~ 1/sqrt(4000).
    const Eigen::MatrixXcd a = mc[i].reduced_phonon(), b = me.states[i].reduced_phonon();
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 0.03) << "t = " << cfg.gt_grid[i];
    const Eigen::MatrixXcd pa = mc[i].reduced_pump(), pb = me.states[i].reduced_pump();
    EXPECT_LT((pa.diagonal() - pb.diagonal()).cwiseAbs().maxCoeff(), 0.03);
  }
}

TEST(Trajectories, HeraldAverageMatchesMasterEquation) {
  const auto cfg = small_config();
  const auto psi0 = small_initial(cfg.policy);
  const HeraldSpec spec{ModeOutcome::homodyne(0.4), ModeOutcome::count(1)};
  const auto me = lindblad_evolve(psi0, cfg);
  const auto mc = trajectory_herald(psi0, cfg, {4000, 3, 1}, spec);
  for (std::size_t i = 0; i < cfg.gt_grid.size(); ++i) {
    const auto ref = herald_from_density(me.states[i], spec);
    EXPECT_NEAR(mc.weight[i], ref.raw_norm(), 4.0 * mc.weight_error[i] + 1e-12);
    EXPECT_LT((mc.states[i].density() - ref.density()).cwiseAbs().maxCoeff(), 0.05);
  }
}

TEST(Trajectories, IndependentOfThreadCount) {
  auto cfg = small_config();
  const auto psi0 = small_initial(cfg.policy);
  const auto one = trajectory_density(psi0, cfg, {64, 11, 1});
  const auto four = trajectory_density(psi0, cfg, {64, 11, 4});
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ((one[i].rho - four[i].rho).cwiseAbs().maxCoeff(), 0.0);
  const auto other = trajectory_density(psi0, cfg, {64, 12, 1});
  EXPECT_GT((one.back().rho - other.back().rho).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Trajectories, LosslessIsDeterministicEvolution) {
  auto cfg = small_config();
  cfg.gamma = 0.0;
  // Stokes widened by the pump cutoff so the exact path loses nothing off the lattice.
  cfg.policy = policy(5, 14, 5);
  const auto psi0 = embed(small_initial(policy(5, 9, 5)), cfg.policy);
  const auto mc = trajectory_density(psi0, cfg, {3, 1, 1});
  for (std::size_t i = 0; i < cfg.gt_grid.size(); ++i) {
    const auto exact = evolve_to(psi0, cfg.gt_grid[i]);
    EXPECT_NEAR(mc[i].overlap(exact), 1.0, 1e-10);
  }
}
