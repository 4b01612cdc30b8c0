#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tripartite/errors.hpp"
#include "tripartite/fock_lattice.hpp"

using namespace tripartite;
using testing_support::policy;

TEST(FockLattice, OffsetsRoundTrip) {
  const auto pol = policy(3, 5, 2);
  TripartiteState s(pol);
  EXPECT_EQ(s.size(), 4u * 6u * 3u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s.offset(s.mode(i)), i);
  EXPECT_EQ(s.offset({0, 0, 1}), 1u);
  EXPECT_EQ(s.offset({0, 1, 0}), 3u);
  EXPECT_FALSE(s.contains({4, 0, 0}));
  EXPECT_FALSE(s.contains({0, -1, 0}));
  EXPECT_THROW(s.offset({0, 6, 0}), CutoffViolation);
}

TEST(FockLattice, PolicyValidation) {
  EXPECT_THROW(policy(-1, 0, 0).validate(), DomainError);
  auto p = policy(1, 1, 1);
  p.tail_mass_tolerance = 1.5;
  EXPECT_THROW(p.validate(), DomainError);
  EXPECT_THROW(TripartiteState(policy(1, 1, 1), std::vector<Complex>(3)), DimensionMismatch);
}

TEST(FockLattice, CoherentAmplitudes) {
  const Complex alpha{1.3, -0.4};
  const auto amps = coherent_amplitudes(alpha, 30);
  double norm = 0.0;
  double fact = 1.0;
  for (int n = 0; n <= 30; ++n) {
    if (n > 0) fact *= n;
    const Complex direct = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) / std::sqrt(fact);
    EXPECT_NEAR(std::abs(amps[n] - direct), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(coherent_amplitude(alpha, n) - direct), 0.0, 1e-14);
    norm += std::norm(amps[n]);
  }
  EXPECT_NEAR(norm, 1.0, 1e-13);
  // Deep in the tail the log-space form neither overflows nor underflows to NaN.
  EXPECT_TRUE(std::isfinite(std::abs(coherent_amplitude(Complex{20.0}, 400))));
}

TEST(FockLattice, PoissonTail) {
  const double mean = 5.6 * 5.6;
  double head = 0.0;
  double term = std::exp(-mean);
  for (int n = 0; n <= 10; ++n) {
    head += term;
    term *= mean / (n + 1);
  }
  EXPECT_NEAR(poisson_tail(mean, 10), 1.0 - head, 1e-12);
  EXPECT_GT(poisson_tail(mean, 10), 0.99);
  const int need = required_cutoff(mean, 1e-4);
  EXPECT_LT(poisson_tail(mean, need), 1e-4);
  EXPECT_GE(poisson_tail(mean, need - 1), 1e-4);
  EXPECT_EQ(required_cutoff(0.0, 1e-4), 0);
}

TEST(FockLattice, PartialTraceOfProductState) {
  const auto pol = policy(2, 2, 2);
  TripartiteState s(pol);
  // (|0> + |1>)_p (x) |1>_S (x) (|0> + i|2>)_b, normalized
  std::vector<Complex> amps(pol.lattice_size());
  for (int p : {0, 1}) {
    amps[s.offset({p, 1, 0})] = 0.5;
    amps[s.offset({p, 1, 2})] = Complex{0.0, 0.5};
  }
  const auto rho = partial_trace_phonon(TripartiteState(pol, amps)).density();
  EXPECT_NEAR(std::abs(rho(0, 0) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rho(2, 2) - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rho(0, 2) - Complex(0.0, -0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(rho(1, 1)), 0.0, 1e-15);
}

TEST(FockLattice, EmbedAndRestrict) {
  std::mt19937_64 rng(3);
  const auto small = testing_support::random_state(policy(2, 3, 2), rng);
  const auto big = embed(small, policy(4, 5, 3));
  EXPECT_NEAR(norm_squared(big), 1.0, 1e-14);
  EXPECT_EQ(big.at(1, 2, 1), small.at(1, 2, 1));
  const auto back = restrict_to(big, small.policy());
  EXPECT_EQ(testing_support::max_abs_diff(back, small), 0.0);
  EXPECT_THROW(embed(small, policy(1, 5, 3)), CutoffViolation);
}

TEST(FockLattice, FrameConversionRoundTrip) {
  std::mt19937_64 rng(5);
  const auto s = testing_support::random_state(policy(2, 2, 2), rng);
  const ModeFrequencies w{3.0, 1.0, 2.0};
  const auto sch = convert_frame(s, Frame::schrodinger, w, 0.7);
  EXPECT_EQ(sch.frame(), Frame::schrodinger);
  // exp(-i H0 t) on |1,1,1> is e^{-i (3 + 1 + 2) 0.7}
  EXPECT_NEAR(std::abs(sch.at(1, 1, 1) - std::polar(1.0, -6.0 * 0.7) * s.at(1, 1, 1)), 0.0, 1e-14);
  const auto back = convert_frame(sch, Frame::interaction, w, 0.7);
  EXPECT_LT(testing_support::max_abs_diff(back, s), 1e-14);
}

TEST(PhononStateTest, NormalizationAndWeight) {
  Eigen::VectorXcd v(3);
  v << 1.0, Complex(0.0, 1.0), 0.0;
  const auto s = PhononState::from_unnormalized(v);
  EXPECT_NEAR(s.raw_norm(), 2.0, 1e-15);
  EXPECT_NEAR(s.trace(), 1.0, 1e-15);
  EXPECT_NEAR(s.purity(), 1.0, 1e-15);
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
  rho(0, 0) = 0.3;
  rho(1, 1) = 0.3;
  const auto m = PhononState::from_unnormalized(rho);
  EXPECT_EQ(m.kind(), PhononState::Kind::mixed);
  EXPECT_NEAR(m.raw_norm(), 0.6, 1e-15);
  EXPECT_NEAR(m.purity(), 0.5, 1e-15);
  EXPECT_THROW(m.amplitudes(), DomainError);
}
