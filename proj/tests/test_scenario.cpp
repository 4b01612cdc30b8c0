#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "tripartite/errors.hpp"
#include "tripartite/scenario.hpp"

using namespace tripartite;

namespace {

std::vector<std::string> problems_of(const std::string& text) {
  try {
    validate_config(text, "doc");
  } catch (const ValidationError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems) {
    if (p.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Scenario, MinimalDocumentGetsDefaults) {
  const auto cfg = validate_config(R"(
name: tiny
initial:
  pump: {kind: coherent, alpha: 0.5}
  stokes: {kind: coherent, alpha: [0, 1.2]}
gt_grid: {start: 0, stop: 2, steps: 4}
)");
  EXPECT_EQ(cfg.name, "tiny");
  EXPECT_EQ(cfg.g, 1.0);
  ASSERT_EQ(cfg.outputs.size(), 1u);
  EXPECT_EQ(cfg.outputs[0], OutputKind::fock_probabilities);
  EXPECT_EQ(cfg.output_dir, std::filesystem::path("out") / "tiny");
  ASSERT_EQ(cfg.series.size(), 1u);
  const auto& s = cfg.series[0];
  EXPECT_EQ(s.gamma, 0.0);
  EXPECT_FALSE(s.herald.has_value());
  EXPECT_EQ(s.initial.stokes.alpha, Complex(0.0, 1.2));
  EXPECT_EQ(s.truncation, default_truncation(s.initial, std::nullopt));
  EXPECT_GE(s.truncation.phonon_cutoff, s.truncation.pump_cutoff);
  EXPECT_EQ(cfg.gt_grid.values().size(), 5u);
  EXPECT_DOUBLE_EQ(cfg.gt_grid.values()[2], 1.0);
}

TEST(Scenario, NegativeGammaRejected) {
  const auto p = problems_of(R"(
name: bad
initial: {pump: {kind: fock, photons: 1}, stokes: vacuum}
gamma: -0.1
gt_grid: {stop: 1, steps: 2}
)");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_TRUE(mentions(p, "gamma must be ≥ 0"));
  EXPECT_EQ(p[0].rfind("doc:4:", 0), 0u) << p[0];
}

TEST(Scenario, EmptyGridRejected) {
  const auto p = problems_of(R"(
name: bad
initial: {pump: {kind: fock, photons: 1}, stokes: vacuum}
gt_grid: {start: 0, stop: 1, steps: 0}
)");
  EXPECT_TRUE(mentions(p, "grid is empty"));
  EXPECT_TRUE(mentions(problems_of("name: x\ninitial: {pump: vacuum, stokes: vacuum}\n"), "gt_grid is required"));
}

TEST(Scenario, TailMassCheckNamesCutoff) {
  const auto p = problems_of(R"(
name: bad
initial:
  pump: {kind: coherent, alpha: 0.74}
  stokes: {kind: coherent, alpha: 5.6}
truncation: {pump_cutoff: 6, stokes_cutoff: 10, phonon_cutoff: 6}
gt_grid: {stop: 1, steps: 2}
)");
  ASSERT_FALSE(p.empty());
  EXPECT_TRUE(mentions(p, "stokes_cutoff 10"));
  EXPECT_TRUE(mentions(p, "need stokes_cutoff >="));
}

TEST(Scenario, AllProblemsReportedTogether) {
  const auto p = problems_of(R"(
name: bad name
colour: blue
initial: {pump: {kind: squeezed}, stokes: vacuum}
gamma: -2
gt_grid: {start: 3, stop: 1, steps: 2}
outputs: [fock_probabilities, histogram]
)");
  EXPECT_TRUE(mentions(p, "unknown key 'colour'"));
  EXPECT_TRUE(mentions(p, "name may only contain"));
  EXPECT_TRUE(mentions(p, "kind must be vacuum, coherent or fock"));
  EXPECT_TRUE(mentions(p, "gamma must be"));
  EXPECT_TRUE(mentions(p, "stop must be >= gt_grid.start"));
  EXPECT_TRUE(mentions(p, "unknown output 'histogram'"));
  for (const auto& msg : p) EXPECT_EQ(msg.rfind("doc:", 0), 0u) << msg;
}

TEST(Scenario, SyntaxErrorIsValidationError) {
  const auto p = problems_of("name: [unterminated\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].rfind("doc:", 0), 0u);
}

TEST(Scenario, SeriesInheritAndOverride) {
  const auto cfg = validate_config(R"(
name: two
initial:
  pump: {kind: coherent, alpha: 0.74}
  stokes: {kind: coherent, alpha: 5.6}
herald:
  pump: {kind: homodyne, alpha: 0.01}
  stokes: {kind: homodyne, alpha: {abs: 5.65, phase_pi: 0.3}}
gt_grid: {stop: 1, steps: 2}
outputs: [fock_probabilities, fidelity_report]
fidelity:
  - {superposition: [2, 3], gt: 0.5}
series:
  - {label: a}
  - {label: b, gamma: 0.25, herald: none, truncation: {pump_cutoff: 5}}
)");
  ASSERT_EQ(cfg.series.size(), 2u);
  EXPECT_TRUE(cfg.series[0].herald.has_value());
  EXPECT_NEAR(std::arg(cfg.series[0].herald->stokes.alpha), 0.3 * 3.141592653589793, 1e-15);
  EXPECT_FALSE(cfg.series[1].herald.has_value());
  EXPECT_EQ(cfg.series[1].gamma, 0.25);
  EXPECT_EQ(cfg.series[1].truncation.pump_cutoff, 5);
  EXPECT_EQ(cfg.series[1].fidelity.size(), 1u);
  EXPECT_EQ(cfg.series[1].fidelity[0].label, "superposition_2_3");
  EXPECT_TRUE(mentions(problems_of(R"(
name: dup
initial: {pump: vacuum, stokes: vacuum}
gt_grid: {stop: 1, steps: 2}
series: [{label: a}, {label: a}]
)"),
                       "repeated"));
}

TEST(Scenario, OutputRequirements) {
  const auto p = problems_of(R"(
name: needs
initial: {pump: {kind: fock, photons: 1}, stokes: vacuum}
gt_grid: {stop: 1, steps: 2}
outputs: [wigner_grid, fidelity_report, swap_sweep]
)");
  EXPECT_TRUE(mentions(p, "wigner_grid needs"));
  EXPECT_TRUE(mentions(p, "fidelity_report needs"));
  EXPECT_TRUE(mentions(p, "swap_sweep needs a swap section"));
}

TEST(Scenario, SwapOnlyNeedsNoGrid) {
  const auto cfg = validate_config("name: sw\noutputs: [swap_sweep]\nswap: {alpha_abs: [4, 8]}\n");
  EXPECT_FALSE(cfg.needs_evolution());
  EXPECT_TRUE(cfg.series.empty());
  ASSERT_TRUE(cfg.swap.has_value());
  EXPECT_EQ(cfg.swap->alpha_abs.size(), 2u);
}

TEST(Scenario, BundledScenariosValidate) {
  const std::filesystem::path dir = TRIPARTITE_SCENARIO_DIR;
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".yaml") continue;
    ++count;
    EXPECT_NO_THROW(load_scenario(entry.path())) << entry.path();
  }
  EXPECT_GE(count, 5);
}
