#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <new>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tripartite/errors.hpp"
#include "tripartite/runner.hpp"
#include "tripartite/scenario.hpp"

namespace fs = std::filesystem;
using namespace tripartite;

namespace {

fs::path scenario_dir() {
  if (const char* env = std::getenv("TRIPARTITE_SCENARIO_DIR"); env && *env) return env;
  return TRIPARTITE_SCENARIO_DIR;
}

std::vector<fs::path> bundled() {
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(scenario_dir(), ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".yaml") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// A path to an existing file, or the name of a bundled scenario.
fs::path locate(const std::string& arg) {
  if (fs::exists(arg)) return arg;
  const fs::path candidate = scenario_dir() / (arg + ".yaml");
  if (fs::exists(candidate)) return candidate;
  throw ValidationError({arg + ": no such file or bundled scenario"});
}

int report(const Error& e) {
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    for (const auto& p : v->problems()) std::cerr << "error: " << p << "\n";
  } else {
    std::cerr << "error: " << e.what() << "\n";
  }
  return e.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tripartite optomechanics simulator"};
  app.require_subcommand(1);

  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string output_dir;
  std::string run_target, validate_target, verify_target;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario file or bundled scenario");
  run->add_option("scenario", run_target, "Scenario file or bundled name")->required();
  run->add_option("--threads", threads, "Worker thread cap")->check(CLI::PositiveNumber);
  run->add_option("--output-dir", output_dir, "Output directory (overrides $TRIPARTITE_OUTPUT_DIR)");
  run->add_flag("-q,--quiet", quiet, "No progress messages");

  auto* list = app.add_subcommand("list", "List bundled scenarios");
  auto* validate = app.add_subcommand("validate", "Validate a scenario without running it");
  validate->add_option("scenario", validate_target, "Scenario file or bundled name")->required();
  auto* verify = app.add_subcommand("verify", "Check the files listed in a run manifest");
  verify->add_option("manifest", verify_target, "manifest.json or its directory")->required();
  auto* version = app.add_subcommand("version", "Print the code version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (version->parsed()) {
      std::cout << "tripartite " << code_version() << "\n";
    } else if (list->parsed()) {
      for (const auto& path : bundled()) {
        std::string description;
        try {
          description = load_scenario(path).description;
        } catch (const Error&) {
          description = "(invalid)";
        }
        std::cout << path.stem().string() << "\t" << description << "\n";
      }
    } else if (validate->parsed()) {
      const auto cfg = load_scenario(locate(validate_target));
      std::cout << cfg.name << ": ok (" << cfg.series.size() << " series)\n";
      for (const auto& s : cfg.series) {
        std::cout << "  " << (s.label.empty() ? "-" : s.label) << ": cutoffs (" << s.truncation.pump_cutoff << ", "
                  << s.truncation.stokes_cutoff << ", " << s.truncation.phonon_cutoff << "), gamma " << s.gamma
                  << "\n";
      }
    } else if (verify->parsed()) {
      fs::path path = verify_target;
      if (fs::is_directory(path)) path /= kManifestName;
      const auto problems = verify_manifest(path);
      for (const auto& p : problems) std::cerr << "mismatch: " << p << "\n";
      if (!problems.empty()) return 1;
      std::cout << path.string() << ": ok\n";
    } else if (run->parsed()) {
      const auto cfg = load_scenario(locate(run_target));
      RunOptions opts;
      opts.threads = threads;
      if (!output_dir.empty()) opts.output_dir = output_dir;
      if (!quiet) opts.log = [](const std::string& msg) { std::cerr << msg << "\n"; };
      const auto manifest = run_scenario(cfg, opts);
      std::cout << manifest.directory.string() << ": " << manifest.files.size() << " files in "
                << manifest.wall_time_s << " s\n";
    }
  } catch (const Error& e) {
    return report(e);
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
