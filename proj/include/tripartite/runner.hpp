#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tripartite/scenario.hpp"

namespace tripartite {

inline constexpr const char* kOutputDirEnv = "TRIPARTITE_OUTPUT_DIR";
inline constexpr const char* kManifestName = "manifest.json";

struct ManifestFile {
  std::string path;  ///< relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct SeriesCutoffs {
  std::string label;
  TruncationPolicy truncation;
};

struct RunManifest {
  std::string scenario;
  std::string config_hash;  ///< SHA-256 of the scenario document
  std::string code_version;
  std::vector<SeriesCutoffs> cutoffs;
  double wall_time_s = 0.0;
  std::vector<ManifestFile> files;  ///< data files, sorted by path; excludes the manifest
  std::filesystem::path directory;
};

struct RunOptions {
  unsigned threads = 1;
  /// Takes precedence over the environment and the scenario's output_dir.
  std::optional<std::filesystem::path> output_dir;
  std::function<void(const std::string&)> log;
};

std::string code_version();

/// Explicit option, else $TRIPARTITE_OUTPUT_DIR/<name>, else the scenario's output_dir.
std::filesystem::path resolve_output_dir(const ScenarioConfig& config, const RunOptions& options);

/// Runs every series and writes the requested artifacts:
///   entropy[_label].csv               gt,S_L
///   fock[_label].csv                  gt,P0..PK
///   wigner[_label]_gt<t>.csv + .json  x,y,W long-form and grid metadata
///   fidelity.json
///   swap_sweep.csv                    alpha_abs,t_pi,swap_infidelity,bell_residual
/// Floats in CSV use 17 significant digits. manifest.json is written last.
///
/// Open-system series are checked against the memory budget before any
/// compute (SizeError).
RunManifest run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Recomputes the checksum of every file listed in a manifest and returns one
/// message per mismatch or missing file.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path);

/// printf("%.17g"), with "nan" and "inf" spelled out.
std::string format_double(double v);

}  // namespace tripartite
