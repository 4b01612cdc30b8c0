#include "tripartite/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>

#include "parallel.hpp"
#include "tripartite/checksum.hpp"
#include "tripartite/errors.hpp"
#include "tripartite/open_system.hpp"
#include "tripartite/pulse_protocols.hpp"
#include "tripartite/trajectories.hpp"

#ifndef TRIPARTITE_VERSION
#define TRIPARTITE_VERSION "unknown"
#endif

namespace tripartite {

using json = nlohmann::ordered_json;

std::string code_version() { return TRIPARTITE_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::filesystem::path resolve_output_dir(const ScenarioConfig& config, const RunOptions& options) {
  if (options.output_dir) return *options.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return std::filesystem::path(env) / config.name;
  return config.output_dir;
}

namespace {

std::string short_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json truncation_json(const TruncationPolicy& p) {
  return json{{"pump_cutoff", p.pump_cutoff},
              {"stokes_cutoff", p.stokes_cutoff},
              {"phonon_cutoff", p.phonon_cutoff},
              {"tail_mass_tolerance", p.tail_mass_tolerance}};
}

struct SeriesResult {
  std::vector<double> times;  // sorted, unique
  std::vector<std::optional<PhononState>> states;

  const std::optional<PhononState>& at(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) throw Error("internal: time " + format_double(t) + " was not evaluated");
    return states[static_cast<std::size_t>(it - times.begin())];
  }
};

std::vector<double> evaluation_times(const ScenarioConfig& cfg, const SeriesConfig& s) {
  std::set<double> t;
  for (double v : cfg.gt_grid.values()) t.insert(v);
  for (double v : s.wigner_times) t.insert(v);
  for (const auto& f : s.fidelity) {
    if (f.gt) t.insert(*f.gt);
  }
  return {t.begin(), t.end()};
}

std::optional<PhononState> normalized_or_empty(const Eigen::MatrixXcd& rho) {
  if (!(rho.trace().real() > 0.0)) return std::nullopt;
  return PhononState::from_unnormalized(rho);
}

LindbladConfig lindblad_config(const ScenarioConfig& cfg, const SeriesConfig& s, std::vector<double> times) {
  LindbladConfig l;
  l.gamma = s.gamma / cfg.g;
  l.gt_grid = std::move(times);
  l.policy = s.truncation;
  l.integrator_tolerance = cfg.integrator.rtol;
  l.absolute_tolerance = cfg.integrator.atol;
  l.memory_budget_bytes = cfg.integrator.memory_budget_mb << 20;
  return l;
}

void check_budget(const ScenarioConfig& cfg, const SeriesConfig& s) {
  if (s.gamma <= 0.0 || cfg.integrator.method != IntegratorConfig::Method::master_equation) return;
  const auto basis = KetBasis::reachable(initial_amplitudes(s.initial, s.truncation), s.truncation);
  const std::size_t need = lindblad_memory_estimate(basis->size(), 0);
  const std::size_t limit = cfg.integrator.memory_budget_mb << 20;
  if (need > limit) {
    throw SizeError("series '" + s.label + "': master equation on " + std::to_string(basis->size()) +
                        " kets needs " + std::to_string(need >> 20) + " MiB, budget is " +
                        std::to_string(cfg.integrator.memory_budget_mb) + " MiB",
                    need, limit);
  }
}

SeriesResult evaluate_series(const ScenarioConfig& cfg, const SeriesConfig& s, unsigned threads) {
  SeriesResult out;
  out.times = evaluation_times(cfg, s);
  out.states.resize(out.times.size());

  if (s.gamma == 0.0) {
    std::optional<TripartiteState> psi0;
    if (s.herald) psi0 = initial_amplitudes(s.initial, s.truncation);
    const Evolver evolver;
    detail::parallel_for(out.times.size(), threads, [&](std::size_t i) {
      const double t = out.times[i];
      if (s.herald) {
        try {
          out.states[i] = herald(evolver.evolve_to(*psi0, t), *s.herald);
        } catch (const HeraldImpossible&) {
          out.states[i].reset();
        }
      } else {
        out.states[i] = normalized_or_empty(reduced_density_matrix(s.initial, s.truncation, t).density());
      }
    });
    return out;
  }

  const TripartiteState psi0 = initial_amplitudes(s.initial, s.truncation);
  const LindbladConfig lcfg = lindblad_config(cfg, s, out.times);
  if (cfg.integrator.method == IntegratorConfig::Method::trajectories) {
    TrajectoryConfig tc{cfg.integrator.samples, cfg.integrator.seed, threads};
    if (s.herald) {
      auto h = trajectory_herald(psi0, lcfg, tc, *s.herald);
      for (std::size_t i = 0; i < out.times.size(); ++i) out.states[i] = h.states[i];
    } else {
      auto d = trajectory_density(psi0, lcfg, tc);
      for (std::size_t i = 0; i < out.times.size(); ++i) out.states[i] = normalized_or_empty(d[i].reduced_phonon());
    }
    return out;
  }
  lindblad_evolve(psi0, lcfg, [&](std::size_t i, const TripartiteDensity& d) {
    if (s.herald) {
      try {
        out.states[i] = herald_from_density(d, *s.herald);
      } catch (const HeraldImpossible&) {
        out.states[i].reset();
      }
    } else {
      out.states[i] = normalized_or_empty(d.reduced_phonon());
    }
  });
  return out;
}

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path.string());
    f << content;
    f.close();
    if (!f) throw Error("failed writing " + path.string());
    files_.push_back({name, sha256_hex(content), content.size()});
  }

  const std::filesystem::path& path() const { return dir_; }
  std::vector<ManifestFile> files() const {
    auto f = files_;
    std::sort(f.begin(), f.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return f;
  }

 private:
  std::filesystem::path dir_;
  std::vector<ManifestFile> files_;
};

double entropy_scale(const ScenarioConfig& cfg, const SeriesConfig& s) {
  switch (cfg.entropy_scale) {
    case EntropyScale::doubled:
      return 2.0;
    case EntropyScale::unscaled:
      return 1.0;
    case EntropyScale::automatic:
      return (s.initial.pump.kind == ModeInit::Kind::fock && s.initial.pump.photons == 1) ? 2.0 : 1.0;
  }
  return 1.0;
}

std::string suffix(const SeriesConfig& s) { return s.label.empty() ? "" : "_" + s.label; }

void write_entropy(OutputDir& dir, const ScenarioConfig& cfg, const SeriesConfig& s, const SeriesResult& r) {
  const double scale = entropy_scale(cfg, s);
  std::string csv = "gt,S_L\n";
  for (double t : cfg.gt_grid.values()) {
    const auto& st = r.at(t);
    const double v = st ? scale * linear_entropy(*st) : std::nan("");
    csv += format_double(t) + "," + format_double(v) + "\n";
  }
  dir.write("entropy" + suffix(s) + ".csv", csv);
}

void write_fock(OutputDir& dir, const ScenarioConfig& cfg, const SeriesConfig& s, const SeriesResult& r) {
  const int levels = s.truncation.phonon_cutoff + 1;
  std::string csv = "gt";
  for (int k = 0; k < levels; ++k) csv += ",P" + std::to_string(k);
  csv += "\n";
  for (double t : cfg.gt_grid.values()) {
    const auto& st = r.at(t);
    csv += format_double(t);
    const Eigen::VectorXd p = st ? st->probabilities() : Eigen::VectorXd::Constant(levels, std::nan(""));
    for (int k = 0; k < levels; ++k) csv += "," + format_double(k < p.size() ? p(k) : 0.0);
    csv += "\n";
  }
  dir.write("fock" + suffix(s) + ".csv", csv);
}

void write_wigner(OutputDir& dir, const ScenarioConfig& cfg, const SeriesConfig& s, const SeriesResult& r) {
  for (double t : s.wigner_times) {
    const auto& st = r.at(t);
    if (!st) throw HeraldImpossible("herald outcome has zero weight at gt = " + format_double(t));
    const WignerGrid grid = wigner(*st, cfg.wigner);
    const auto& spec = grid.spec;
    std::string csv = "x,y,W\n";
    for (int i = 0; i < spec.resolution; ++i) {
      for (int j = 0; j < spec.resolution; ++j) {
        csv += format_double(spec.x(i)) + "," + format_double(spec.y(j)) + "," + format_double(grid.values(j, i)) + "\n";
      }
    }
    const std::string stem = "wigner" + suffix(s) + "_gt" + short_number(t);
    dir.write(stem + ".csv", csv);
    json meta{{"series", s.label},
              {"gt", t},
              {"x_min", spec.x_min},
              {"x_max", spec.x_max},
              {"y_min", spec.y_min},
              {"y_max", spec.y_max},
              {"resolution", spec.resolution},
              {"alpha", "(x + i y)/sqrt(2)"},
              {"normalization", "integral of W over d^2 alpha = 1; cell area dx dy / 2"},
              {"cell_area", spec.cell_area()},
              {"integral", grid.integral()},
              {"negativity_volume", wigner_negativity_volume(grid)},
              {"w_min", grid.values.minCoeff()},
              {"w_max", grid.values.maxCoeff()},
              {"herald_weight", st->raw_norm()},
              {"csv", stem + ".csv"}};
    dir.write(stem + ".json", meta.dump(2) + "\n");
  }
}

json fidelity_entry(const FidelityTarget& target, const PhononState& st) {
  json e;
  if (target.kind == FidelityTarget::Kind::fock) {
    e["fidelity"] = fidelity(st, fock_phonon(target.level_a, st.dimension()));
  } else {
    const auto opt = superposition_fidelity(st, target.level_a, target.level_b);
    e["fidelity"] = opt.fidelity;
    e["phase"] = opt.phase;
  }
  e["herald_weight"] = st.raw_norm();
  const Eigen::VectorXd p = st.probabilities();
  e["probabilities"] = std::vector<double>(p.data(), p.data() + p.size());
  return e;
}

void write_fidelity(OutputDir& dir, const ScenarioConfig& cfg, const std::vector<SeriesResult>& results) {
  json series = json::array();
  for (std::size_t si = 0; si < cfg.series.size(); ++si) {
    const auto& s = cfg.series[si];
    const auto& r = results[si];
    json targets = json::array();
    for (const auto& target : s.fidelity) {
      json t{{"label", target.label},
             {"kind", target.kind == FidelityTarget::Kind::fock ? "fock" : "superposition"}};
      if (target.kind == FidelityTarget::Kind::fock) {
        t["levels"] = {target.level_a};
      } else {
        t["levels"] = {target.level_a, target.level_b};
      }
      std::optional<double> when;
      json best;
      if (target.gt) {
        t["mode"] = "at";
        when = *target.gt;
        if (const auto& st = r.at(*target.gt)) best = fidelity_entry(target, *st);
      } else {
        t["mode"] = "search";
        t["search"] = {std::isfinite(target.search_start) ? json(target.search_start) : json(nullptr),
                       std::isfinite(target.search_stop) ? json(target.search_stop) : json(nullptr)};
        double best_f = -1.0;
        for (double g : cfg.gt_grid.values()) {
          if (g < target.search_start || g > target.search_stop) continue;
          const auto& st = r.at(g);
          if (!st) continue;
          json e = fidelity_entry(target, *st);
          if (e["fidelity"].get<double>() > best_f) {
            best_f = e["fidelity"].get<double>();
            best = std::move(e);
            when = g;
          }
        }
      }
      t["gt"] = when ? json(*when) : json(nullptr);
      if (best.is_null()) {
        t["fidelity"] = nullptr;
      } else {
        for (auto& [k, v] : best.items()) t[k] = v;
      }
      targets.push_back(std::move(t));
    }
    series.push_back(json{{"label", s.label},
                          {"gamma", s.gamma},
                          {"truncation", truncation_json(s.truncation)},
                          {"targets", std::move(targets)}});
  }
  json doc{{"scenario", cfg.name}, {"series", std::move(series)}};
  dir.write("fidelity.json", doc.dump(2) + "\n");
}

void write_swap(OutputDir& dir, const ScenarioConfig& cfg, unsigned threads) {
  const auto& sw = *cfg.swap;
  std::vector<Complex> alphas;
  for (double a : sw.alpha_abs) alphas.push_back(std::polar(a, sw.phase_pi * std::numbers::pi));
  const auto points = swap_sweep(alphas, sw.c0, sw.c1, threads);
  std::string csv = "alpha_abs,t_pi,swap_infidelity,bell_residual\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    csv += format_double(sw.alpha_abs[i]) + "," + format_double(points[i].t_pi) + "," +
           format_double(points[i].swap_infidelity) + "," + format_double(points[i].bell_residual) + "\n";
  }
  dir.write("swap_sweep.csv", csv);
}

}  // namespace

RunManifest run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };
  const unsigned threads = std::max(1u, options.threads);

  if (cfg.needs_evolution()) {
    for (const auto& s : cfg.series) check_budget(cfg, s);
  }

  OutputDir dir(resolve_output_dir(cfg, options));
  std::vector<SeriesResult> results;
  if (cfg.needs_evolution()) {
    for (const auto& s : cfg.series) {
      log("series '" + s.label + "': gamma = " + short_number(s.gamma) + ", cutoffs (" +
          std::to_string(s.truncation.pump_cutoff) + ", " + std::to_string(s.truncation.stokes_cutoff) + ", " +
          std::to_string(s.truncation.phonon_cutoff) + ")");
      results.push_back(evaluate_series(cfg, s, threads));
    }
    for (std::size_t i = 0; i < cfg.series.size(); ++i) {
      const auto& s = cfg.series[i];
      if (cfg.wants(OutputKind::entropy_trace)) write_entropy(dir, cfg, s, results[i]);
      if (cfg.wants(OutputKind::fock_probabilities)) write_fock(dir, cfg, s, results[i]);
      if (cfg.wants(OutputKind::wigner_grid)) write_wigner(dir, cfg, s, results[i]);
    }
    if (cfg.wants(OutputKind::fidelity_report)) write_fidelity(dir, cfg, results);
  }
  if (cfg.wants(OutputKind::swap_sweep)) {
    log("swap sweep over " + std::to_string(cfg.swap->alpha_abs.size()) + " amplitudes");
    write_swap(dir, cfg, threads);
  }

  RunManifest m;
  m.scenario = cfg.name;
  m.config_hash = sha256_hex(cfg.source_text);
  m.code_version = code_version();
  for (const auto& s : cfg.series) m.cutoffs.push_back({s.label, s.truncation});
  m.files = dir.files();
  m.directory = dir.path();
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  json cut = json::array();
  for (const auto& c : m.cutoffs) cut.push_back(json{{"series", c.label}, {"truncation", truncation_json(c.truncation)}});
  json files = json::array();
  for (const auto& f : m.files) files.push_back(json{{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  json doc{{"scenario", m.scenario},
           {"config_sha256", m.config_hash},
           {"code_version", m.code_version},
           {"cutoffs", std::move(cut)},
           {"wall_time_s", m.wall_time_s},
           {"files", std::move(files)}};
  const auto manifest_path = m.directory / kManifestName;
  std::ofstream f(manifest_path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + manifest_path.string());
  f << doc.dump(2) << "\n";
  if (!f) throw Error("failed writing " + manifest_path.string());
  return m;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) return {"cannot read " + manifest_path.string()};
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    return {manifest_path.string() + ": " + e.what()};
  }
  std::vector<std::string> problems;
  const auto dir = manifest_path.parent_path();
  if (!doc.contains("files") || !doc["files"].is_array()) return {"manifest has no file list"};
  for (const auto& f : doc["files"]) {
    const auto rel = f.value("path", std::string{});
    const auto path = dir / rel;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
      problems.push_back(rel + ": missing");
      continue;
    }
    const auto digest = sha256_file(path);
    if (digest != f.value("sha256", std::string{})) problems.push_back(rel + ": checksum mismatch");
    if (std::filesystem::file_size(path, ec) != f.value("bytes", std::uintmax_t{0})) {
      problems.push_back(rel + ": size mismatch");
    }
  }
  return problems;
}

}  // namespace tripartite
