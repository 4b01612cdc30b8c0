#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "tripartite/jc_equivalence.hpp"

using namespace tripartite;
using testing_support::policy;

TEST(Pseudospin, CommutatorsOnInteriorKets) {
  const auto ops = build_pseudospin(policy(8, 0, 8));
  const auto r = verify_algebra(ops);
  EXPECT_LT(r.max_commutator_deviation(), 1e-12);
  EXPECT_EQ(r.interior_kets, 45u);
}

TEST(Pseudospin, CasimirSectors) {
  const auto r = verify_algebra(build_pseudospin(policy(8, 0, 8)));
  ASSERT_EQ(r.sectors.size(), 9u);
  for (const auto& s : r.sectors) {
    const double n = 0.5 * s.twice_n;
    EXPECT_EQ(s.expected, n * (n + 1.0));
    EXPECT_LT(s.max_deviation, 1e-12) << "2N = " << s.twice_n;
  }
}

TEST(Pseudospin, TruncationEdgeIsExcluded) {
  // Columns on the lattice edge break [S+, S-] = 2 Sz; the report must not see them.
  const auto ops = build_pseudospin(policy(2, 0, 2));
  const Eigen::MatrixXd c = ops.s_plus * ops.s_minus - ops.s_minus * ops.s_plus - 2.0 * ops.s_z;
  EXPECT_GT(c.cwiseAbs().maxCoeff(), 0.5);
  EXPECT_LT(verify_algebra(ops).max_commutator_deviation(), 1e-12);
}

TEST(Pseudospin, HamiltonianEquivalence) {
  EXPECT_LT(pseudospin_hamiltonian_deviation(policy(3, 4, 3)), 1e-14);
  EXPECT_LT(pseudospin_hamiltonian_deviation(policy(2, 5, 4)), 1e-14);
}

TEST(Pseudospin, SpinHalfRabi) {
  for (int m : {0, 5}) {
    for (double t : {0.2, 1.1, 3.3}) {
      const auto p = spin_half_rabi(m, t);
      const double w = std::sqrt(m + 1.0) * t;
      EXPECT_NEAR(p(0), std::pow(std::cos(w), 2), 1e-12);
      EXPECT_NEAR(p(1), std::pow(std::sin(w), 2), 1e-12);
    }
  }
}
