#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tripartite/evolution.hpp"
#include "tripartite/measurement.hpp"
#include "tripartite/phase_space.hpp"

namespace tripartite {

enum class OutputKind { entropy_trace, fock_probabilities, wigner_grid, fidelity_report, swap_sweep };

const char* to_string(OutputKind kind);

/// `steps` intervals from start to stop, so steps + 1 points.
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  int steps = 0;

  std::vector<double> values() const;
};

struct FidelityTarget {
  enum class Kind { fock, superposition };

  std::string label;
  Kind kind = Kind::fock;
  int level_a = 0;
  int level_b = 0;  ///< superposition only
  /// Evaluate at this time; otherwise maximize over grid points in [search_start, search_stop].
  std::optional<double> gt;
  double search_start = 0.0;
  double search_stop = 0.0;
};

/// One parameterization inside a scenario. Fields left out of a series entry
/// inherit the top-level values.
struct SeriesConfig {
  std::string label;
  InitialSpec initial;
  double gamma = 0.0;  ///< in units of g
  std::optional<HeraldSpec> herald;
  TruncationPolicy truncation;
  std::vector<double> wigner_times;
  std::vector<FidelityTarget> fidelity;
};

struct IntegratorConfig {
  enum class Method { master_equation, trajectories };

  Method method = Method::master_equation;
  double rtol = 1e-7;
  double atol = 1e-10;
  std::size_t memory_budget_mb = 2048;
  std::size_t samples = 512;
  std::uint64_t seed = 1;
};

struct SwapSweepConfig {
  std::vector<double> alpha_abs;
  double phase_pi = 0.5;  ///< arg(alpha_S) / pi
  Complex c0{0.0};
  Complex c1{1.0};
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  double g = 1.0;
  GridSpec gt_grid;
  std::vector<OutputKind> outputs;
  WignerGridSpec wigner;
  EntropyScale entropy_scale = EntropyScale::automatic;
  IntegratorConfig integrator;
  std::optional<SwapSweepConfig> swap;
  std::vector<SeriesConfig> series;
  std::filesystem::path output_dir;
  /// Exact document text; hashed into the run manifest.
  std::string source_text;

  bool wants(OutputKind kind) const;
  /// Whether any requested output needs time evolution.
  bool needs_evolution() const;
};

/// Parses and validates a scenario document. Every problem found is collected
/// and reported together as a ValidationError, each message prefixed with
/// "<origin>:<line>:". Unknown keys are rejected. Omitted fields get defaults:
/// g = 1, gamma = 0, outputs = [fock_probabilities], the default Wigner grid,
/// output_dir = out/<name>, and cutoffs derived from the preparation's Poisson
/// tails (Stokes cutoff widened by the pump cutoff so the populated sectors fit).
ScenarioConfig validate_config(std::string_view text, std::string_view origin = "<scenario>");

/// Reads a file and validates it with the path as origin.
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// Cutoffs used when a scenario omits them.
TruncationPolicy default_truncation(const InitialSpec& initial, const std::optional<HeraldSpec>& herald,
                                    double tail_mass = kDefaultTailMass);

}  // namespace tripartite
