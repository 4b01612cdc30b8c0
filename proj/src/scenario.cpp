#include "tripartite/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "tripartite/errors.hpp"

namespace tripartite {

const char* to_string(OutputKind kind) {
  switch (kind) {
    case OutputKind::entropy_trace:
      return "entropy_trace";
    case OutputKind::fock_probabilities:
      return "fock_probabilities";
    case OutputKind::wigner_grid:
      return "wigner_grid";
    case OutputKind::fidelity_report:
      return "fidelity_report";
    case OutputKind::swap_sweep:
      return "swap_sweep";
  }
  return "?";
}

std::vector<double> GridSpec::values() const {
  std::vector<double> out;
  if (steps < 1) return out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  const double h = (stop - start) / steps;
  for (int i = 0; i <= steps; ++i) out.push_back(i == steps ? stop : start + i * h);
  return out;
}

bool ScenarioConfig::wants(OutputKind kind) const {
  return std::find(outputs.begin(), outputs.end(), kind) != outputs.end();
}

bool ScenarioConfig::needs_evolution() const {
  return std::any_of(outputs.begin(), outputs.end(), [](OutputKind k) { return k != OutputKind::swap_sweep; });
}

TruncationPolicy default_truncation(const InitialSpec& initial, const std::optional<HeraldSpec>& herald,
                                    double tail_mass) {
  TruncationPolicy p;
  p.tail_mass_tolerance = tail_mass;
  p.pump_cutoff = initial.pump.required_cutoff(tail_mass);
  int stokes = initial.stokes.required_cutoff(tail_mass);
  if (herald) {
    auto need = [&](const ModeOutcome& o) {
      if (o.kind == ModeOutcome::Kind::homodyne) return required_cutoff(std::norm(o.alpha), tail_mass);
      if (o.kind == ModeOutcome::Kind::count) return o.photons;
      return 0;
    };
    p.pump_cutoff = std::max(p.pump_cutoff, need(herald->pump));
    stokes = std::max(stokes, need(herald->stokes));
  }
  p.stokes_cutoff = stokes + p.pump_cutoff;
  p.phonon_cutoff = p.pump_cutoff;
  return p;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  void fail(const YAML::Node& at, const std::string& msg) { fail_line(line_of(at), msg); }
  void fail_line(int line, const std::string& msg) {
    problems_.push_back(origin_ + ":" + (line > 0 ? std::to_string(line) : std::string("?")) + ": " + msg);
  }
  const std::vector<std::string>& problems() const { return problems_; }

  static int line_of(const YAML::Node& n) {
    if (!n.IsDefined()) return 0;
    const auto mark = n.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
  }

  // Reports keys of `map` outside `allowed`. Returns false if `map` is not a mapping.
  bool keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed, const std::string& ctx) {
    if (!map.IsMap()) {
      fail(map, ctx + " must be a mapping");
      return false;
    }
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(kv.first, "unknown key '" + key + "' in " + ctx);
      }
    }
    return true;
  }

  std::optional<double> real(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) {
      fail(n, what + " must be a number");
      return std::nullopt;
    }
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) {
        fail(n, what + " must be finite");
        return std::nullopt;
      }
      return v;
    } catch (const YAML::Exception&) {
      fail(n, what + " must be a number, got '" + n.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<long long> integer(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) {
      fail(n, what + " must be an integer");
      return std::nullopt;
    }
    try {
      return n.as<long long>();
    } catch (const YAML::Exception&) {
      fail(n, what + " must be an integer, got '" + n.Scalar() + "'");
      return std::nullopt;
    }
  }

  std::optional<std::string> text(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) {
      fail(n, what + " must be a string");
      return std::nullopt;
    }
    return n.Scalar();
  }

  // Number (real), [re, im], {re, im} or {abs, phase_pi}.
  std::optional<Complex> complex(const YAML::Node& n, const std::string& what) {
    if (n.IsScalar()) {
      const auto v = real(n, what);
      return v ? std::optional<Complex>(Complex{*v, 0.0}) : std::nullopt;
    }
    if (n.IsSequence()) {
      if (n.size() != 2) {
        fail(n, what + " as a list must be [re, im]");
        return std::nullopt;
      }
      const auto re = real(n[0], what + " real part");
      const auto im = real(n[1], what + " imaginary part");
      if (!re || !im) return std::nullopt;
      return Complex{*re, *im};
    }
    if (n.IsMap()) {
      if (!keys(n, {"re", "im", "abs", "phase_pi"}, what)) return std::nullopt;
      if (n["abs"]) {
        if (n["re"] || n["im"]) {
          fail(n, what + " mixes polar and Cartesian components");
          return std::nullopt;
        }
        const auto r = real(n["abs"], what + ".abs");
        std::optional<double> ph = 0.0;
        if (n["phase_pi"]) ph = real(n["phase_pi"], what + ".phase_pi");
        if (!r || !ph) return std::nullopt;
        if (*r < 0.0) {
          fail(n["abs"], what + ".abs must be >= 0");
          return std::nullopt;
        }
        return std::polar(*r, *ph * std::numbers::pi);
      }
      std::optional<double> re = 0.0, im = 0.0;
      if (n["re"]) re = real(n["re"], what + ".re");
      if (n["im"]) im = real(n["im"], what + ".im");
      if (!re || !im) return std::nullopt;
      return Complex{*re, *im};
    }
    fail(n, what + " must be a number, [re, im] or a mapping");
    return std::nullopt;
  }

  std::optional<ModeInit> mode_init(const YAML::Node& n, const std::string& what) {
    if (n.IsScalar() && n.Scalar() == "vacuum") return ModeInit::vacuum();
    if (!keys(n, {"kind", "alpha", "photons"}, what)) return std::nullopt;
    const auto kind = n["kind"] ? text(n["kind"], what + ".kind") : std::optional<std::string>{};
    if (!kind) {
      if (!n["kind"]) fail(n, what + ".kind is required (vacuum, coherent or fock)");
      return std::nullopt;
    }
    if (*kind == "vacuum") return ModeInit::vacuum();
    if (*kind == "coherent") {
      if (!n["alpha"]) {
        fail(n, what + ".alpha is required for a coherent state");
        return std::nullopt;
      }
      const auto a = complex(n["alpha"], what + ".alpha");
      return a ? std::optional<ModeInit>(ModeInit::coherent(*a)) : std::nullopt;
    }
    if (*kind == "fock") {
      if (!n["photons"]) {
        fail(n, what + ".photons is required for a Fock state");
        return std::nullopt;
      }
      const auto k = integer(n["photons"], what + ".photons");
      if (!k) return std::nullopt;
      if (*k < 0) {
        fail(n["photons"], what + ".photons must be >= 0");
        return std::nullopt;
      }
      return ModeInit::fock(static_cast<int>(*k));
    }
    fail(n["kind"], what + ".kind must be vacuum, coherent or fock");
    return std::nullopt;
  }

  std::optional<ModeOutcome> outcome(const YAML::Node& n, const std::string& what) {
    if (n.IsScalar() && n.Scalar() == "untouched") return ModeOutcome::untouched();
    if (!keys(n, {"kind", "alpha", "photons"}, what)) return std::nullopt;
    const auto kind = n["kind"] ? text(n["kind"], what + ".kind") : std::optional<std::string>{};
    if (!kind) {
      if (!n["kind"]) fail(n, what + ".kind is required (untouched, homodyne or count)");
      return std::nullopt;
    }
    if (*kind == "untouched") return ModeOutcome::untouched();
    if (*kind == "homodyne") {
      if (!n["alpha"]) {
        fail(n, what + ".alpha is required for a homodyne outcome");
        return std::nullopt;
      }
      const auto a = complex(n["alpha"], what + ".alpha");
      return a ? std::optional<ModeOutcome>(ModeOutcome::homodyne(*a)) : std::nullopt;
    }
    if (*kind == "count") {
      if (!n["photons"]) {
        fail(n, what + ".photons is required for a count outcome");
        return std::nullopt;
      }
      const auto k = integer(n["photons"], what + ".photons");
      if (!k) return std::nullopt;
      if (*k < 0) {
        fail(n["photons"], what + ".photons must be >= 0");
        return std::nullopt;
      }
      return ModeOutcome::count(static_cast<int>(*k));
    }
    fail(n["kind"], what + ".kind must be untouched, homodyne or count");
    return std::nullopt;
  }

  std::vector<double> real_list(const YAML::Node& n, const std::string& what) {
    std::vector<double> out;
    if (!n.IsSequence()) {
      fail(n, what + " must be a list of numbers");
      return out;
    }
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (auto v = real(n[i], what + "[" + std::to_string(i) + "]")) out.push_back(*v);
    }
    return out;
  }

 private:
  std::string origin_;
  std::vector<std::string> problems_;
};

const std::regex kLabelPattern("[A-Za-z0-9_.-]+");

struct SeriesNodes {
  YAML::Node anchor;
  YAML::Node initial, gamma, herald, truncation, wigner_times, fidelity;
};

void read_truncation(Reader& r, const YAML::Node& n, SeriesConfig& s, const std::string& ctx, double tail) {
  const std::string what = ctx + "truncation";
  if (!r.keys(n, {"pump_cutoff", "stokes_cutoff", "phonon_cutoff", "tail_mass_tolerance"}, what)) return;
  TruncationPolicy p = s.truncation;
  auto cutoff = [&](const char* key, int& dst) {
    if (!n[key]) return;
    if (auto v = r.integer(n[key], what + "." + key)) {
      if (*v < 0) {
        r.fail(n[key], what + "." + key + " must be >= 0");
      } else if (*v > 100000) {
        r.fail(n[key], what + "." + key + " is unreasonably large");
      } else {
        dst = static_cast<int>(*v);
      }
    }
  };
  cutoff("pump_cutoff", p.pump_cutoff);
  cutoff("stokes_cutoff", p.stokes_cutoff);
  cutoff("phonon_cutoff", p.phonon_cutoff);
  p.tail_mass_tolerance = tail;
  s.truncation = p;
}

void read_fidelity(Reader& r, const YAML::Node& n, SeriesConfig& s, const std::string& ctx) {
  const std::string what = ctx + "fidelity";
  s.fidelity.clear();
  if (!n.IsSequence()) {
    r.fail(n, what + " must be a list of targets");
    return;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto& t = n[i];
    const std::string w = what + "[" + std::to_string(i) + "]";
    if (!r.keys(t, {"label", "fock", "superposition", "gt", "search"}, w)) continue;
    FidelityTarget target;
    if (t["fock"] && t["superposition"]) {
      r.fail(t, w + " must name exactly one of fock or superposition");
      continue;
    }
    if (t["fock"]) {
      target.kind = FidelityTarget::Kind::fock;
      const auto k = r.integer(t["fock"], w + ".fock");
      if (!k) continue;
      if (*k < 0) {
        r.fail(t["fock"], w + ".fock must be >= 0");
        continue;
      }
      target.level_a = static_cast<int>(*k);
    } else if (t["superposition"]) {
      target.kind = FidelityTarget::Kind::superposition;
      const auto& lv = t["superposition"];
      if (!lv.IsSequence() || lv.size() != 2) {
        r.fail(lv, w + ".superposition must be a pair of Fock levels");
        continue;
      }
      const auto a = r.integer(lv[0], w + ".superposition[0]");
      const auto b = r.integer(lv[1], w + ".superposition[1]");
      if (!a || !b) continue;
      if (*a < 0 || *b < 0 || *a == *b) {
        r.fail(lv, w + ".superposition levels must be distinct and >= 0");
        continue;
      }
      target.level_a = static_cast<int>(*a);
      target.level_b = static_cast<int>(*b);
    } else {
      r.fail(t, w + " must name fock or superposition");
      continue;
    }
    if (t["label"]) {
      if (auto l = r.text(t["label"], w + ".label")) target.label = *l;
    } else {
      target.label = target.kind == FidelityTarget::Kind::fock
                         ? "fock_" + std::to_string(target.level_a)
                         : "superposition_" + std::to_string(target.level_a) + "_" + std::to_string(target.level_b);
    }
    if (t["gt"] && t["search"]) {
      r.fail(t, w + " takes either gt or search, not both");
      continue;
    }
    if (t["gt"]) {
      if (auto v = r.real(t["gt"], w + ".gt")) {
        if (*v < 0.0) {
          r.fail(t["gt"], w + ".gt must be >= 0");
          continue;
        }
        target.gt = *v;
      }
    } else if (t["search"]) {
      const auto range = r.real_list(t["search"], w + ".search");
      if (range.size() != 2 || range[1] < range[0]) {
        r.fail(t["search"], w + ".search must be [start, stop] with stop >= start");
        continue;
      }
      target.search_start = range[0];
      target.search_stop = range[1];
    } else {
      target.search_start = -std::numeric_limits<double>::infinity();
      target.search_stop = std::numeric_limits<double>::infinity();
    }
    s.fidelity.push_back(target);
  }
}

void read_series_fields(Reader& r, const SeriesNodes& nodes, SeriesConfig& s, const std::string& ctx,
                        double tail, bool& has_truncation) {
  if (nodes.initial) {
    const std::string what = ctx + "initial";
    if (r.keys(nodes.initial, {"pump", "stokes"}, what)) {
      if (nodes.initial["pump"]) {
        if (auto m = r.mode_init(nodes.initial["pump"], what + ".pump")) s.initial.pump = *m;
      }
      if (nodes.initial["stokes"]) {
        if (auto m = r.mode_init(nodes.initial["stokes"], what + ".stokes")) s.initial.stokes = *m;
      }
    }
  }
  if (nodes.gamma) {
    if (auto v = r.real(nodes.gamma, ctx + "gamma")) {
      if (*v < 0.0) {
        r.fail(nodes.gamma, ctx + "gamma must be ≥ 0");
      } else {
        s.gamma = *v;
      }
    }
  }
  if (nodes.herald) {
    const std::string what = ctx + "herald";
    if (nodes.herald.IsScalar() && nodes.herald.Scalar() == "none") {
      s.herald.reset();
    } else if (r.keys(nodes.herald, {"pump", "stokes"}, what)) {
      HeraldSpec h;
      if (nodes.herald["pump"]) {
        if (auto o = r.outcome(nodes.herald["pump"], what + ".pump")) h.pump = *o;
      }
      if (nodes.herald["stokes"]) {
        if (auto o = r.outcome(nodes.herald["stokes"], what + ".stokes")) h.stokes = *o;
      }
      s.herald = h;
    }
  }
  if (nodes.truncation) {
    read_truncation(r, nodes.truncation, s, ctx, tail);
    has_truncation = true;
  }
  if (nodes.wigner_times) {
    s.wigner_times = r.real_list(nodes.wigner_times, ctx + "wigner.times");
    for (double t : s.wigner_times) {
      if (t < 0.0) r.fail(nodes.wigner_times, ctx + "wigner times must be >= 0");
    }
  }
  if (nodes.fidelity) read_fidelity(r, nodes.fidelity, s, ctx);
}

// Checks that the lattice resolves the preparation and any homodyne outcome.
void check_tails(Reader& r, const YAML::Node& at, const SeriesConfig& s, const std::string& ctx) {
  const auto& p = s.truncation;
  const double tol = p.tail_mass_tolerance;
  auto mode = [&](const ModeInit& m, int cutoff, const char* name) {
    const double tail = m.tail_mass(cutoff);
    if (tail >= tol) {
      std::ostringstream msg;
      msg << ctx << "truncation." << name << "_cutoff " << cutoff << " leaves tail mass " << tail
          << " of the initial " << name << " state (tolerance " << tol << "); need "
          << name << "_cutoff >= " << m.required_cutoff(tol);
      r.fail(at, msg.str());
    }
  };
  mode(s.initial.pump, p.pump_cutoff, "pump");
  mode(s.initial.stokes, p.stokes_cutoff, "stokes");
  if (s.herald) {
    auto outcome = [&](const ModeOutcome& o, int cutoff, const char* name) {
      if (o.kind == ModeOutcome::Kind::homodyne) {
        const double mean = std::norm(o.alpha);
        const double tail = poisson_tail(mean, cutoff);
        if (tail >= tol) {
          std::ostringstream msg;
          msg << ctx << "truncation." << name << "_cutoff " << cutoff << " leaves Poisson tail " << tail
              << " of the " << name << " homodyne outcome (tolerance " << tol << "); need " << name
              << "_cutoff >= " << required_cutoff(mean, tol);
          r.fail(at, msg.str());
        }
      } else if (o.kind == ModeOutcome::Kind::count && o.photons > cutoff) {
        r.fail(at, ctx + "herald " + name + " count " + std::to_string(o.photons) + " exceeds the " + name +
                       " cutoff " + std::to_string(cutoff));
      }
    };
    outcome(s.herald->pump, p.pump_cutoff, "pump");
    outcome(s.herald->stokes, p.stokes_cutoff, "stokes");
  }
}

}  // namespace

ScenarioConfig validate_config(std::string_view text, std::string_view origin) {
  Reader r{std::string(origin)};
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    r.fail_line(e.mark.line + 1, "YAML syntax error: " + e.msg);
    throw ValidationError(r.problems());
  }
  if (!root || root.IsNull()) {
    r.fail_line(1, "scenario document is empty");
    throw ValidationError(r.problems());
  }
  if (!r.keys(root, {"name", "description", "initial", "g", "gamma", "gt_grid", "truncation", "herald",
                     "outputs", "wigner", "fidelity", "entropy_scale", "integrator", "swap", "series",
                     "output_dir"},
              "scenario")) {
    throw ValidationError(r.problems());
  }

  ScenarioConfig cfg;
  cfg.source_text = std::string(text);

  if (!root["name"]) {
    r.fail(root, "name is required");
  } else if (auto n = r.text(root["name"], "name")) {
    if (!std::regex_match(*n, kLabelPattern)) {
      r.fail(root["name"], "name may only contain letters, digits, '.', '_' and '-'");
    }
    cfg.name = *n;
  }
  if (root["description"]) {
    if (auto d = r.text(root["description"], "description")) cfg.description = *d;
  }
  if (root["g"]) {
    if (auto v = r.real(root["g"], "g")) {
      if (*v <= 0.0) r.fail(root["g"], "g must be > 0");
      else cfg.g = *v;
    }
  }

  // Outputs.
  if (root["outputs"]) {
    const auto& o = root["outputs"];
    if (!o.IsSequence() || o.size() == 0) {
      r.fail(o, "outputs must be a non-empty list");
    } else {
      for (std::size_t i = 0; i < o.size(); ++i) {
        const auto s = r.text(o[i], "outputs[" + std::to_string(i) + "]");
        if (!s) continue;
        std::optional<OutputKind> kind;
        for (auto k : {OutputKind::entropy_trace, OutputKind::fock_probabilities, OutputKind::wigner_grid,
                       OutputKind::fidelity_report, OutputKind::swap_sweep}) {
          if (*s == to_string(k)) kind = k;
        }
        if (!kind) {
          r.fail(o[i], "unknown output '" + *s +
                           "' (expected entropy_trace, fock_probabilities, wigner_grid, fidelity_report or swap_sweep)");
        } else if (!cfg.wants(*kind)) {
          cfg.outputs.push_back(*kind);
        }
      }
    }
  } else {
    cfg.outputs = {OutputKind::fock_probabilities};
  }
  const bool evolution = cfg.outputs.empty() || cfg.needs_evolution();

  // Time grid.
  if (root["gt_grid"]) {
    const auto& gnode = root["gt_grid"];
    if (r.keys(gnode, {"start", "stop", "steps"}, "gt_grid")) {
      if (gnode["start"]) {
        if (auto v = r.real(gnode["start"], "gt_grid.start")) cfg.gt_grid.start = *v;
      }
      if (!gnode["stop"]) {
        r.fail(gnode, "gt_grid.stop is required");
      } else if (auto v = r.real(gnode["stop"], "gt_grid.stop")) {
        cfg.gt_grid.stop = *v;
      }
      if (!gnode["steps"]) {
        r.fail(gnode, "gt_grid.steps is required");
      } else if (auto v = r.integer(gnode["steps"], "gt_grid.steps")) {
        if (*v < 1) r.fail(gnode["steps"], "gt_grid.steps must be >= 1 (the grid is empty)");
        else if (*v > 1000000) r.fail(gnode["steps"], "gt_grid.steps must be <= 1000000");
        else cfg.gt_grid.steps = static_cast<int>(*v);
      }
      if (cfg.gt_grid.start < 0.0) r.fail(gnode, "gt_grid.start must be >= 0");
      if (cfg.gt_grid.stop < cfg.gt_grid.start) r.fail(gnode, "gt_grid.stop must be >= gt_grid.start");
    }
  } else if (evolution) {
    r.fail(root, "gt_grid is required (the grid is empty)");
  }

  // Wigner grid.
  YAML::Node wigner_times{YAML::NodeType::Undefined};
  if (root["wigner"]) {
    const auto& w = root["wigner"];
    if (r.keys(w, {"x_min", "x_max", "y_min", "y_max", "resolution", "times"}, "wigner")) {
      auto bound = [&](const char* key, double& dst) {
        if (w[key]) {
          if (auto v = r.real(w[key], std::string("wigner.") + key)) dst = *v;
        }
      };
      bound("x_min", cfg.wigner.x_min);
      bound("x_max", cfg.wigner.x_max);
      bound("y_min", cfg.wigner.y_min);
      bound("y_max", cfg.wigner.y_max);
      if (w["resolution"]) {
        if (auto v = r.integer(w["resolution"], "wigner.resolution")) {
          if (*v < 2 || *v > 4001) r.fail(w["resolution"], "wigner.resolution must be in [2, 4001]");
          else cfg.wigner.resolution = static_cast<int>(*v);
        }
      }
      if (!(cfg.wigner.x_max > cfg.wigner.x_min) || !(cfg.wigner.y_max > cfg.wigner.y_min)) {
        r.fail(w, "wigner ranges must satisfy x_min < x_max and y_min < y_max");
      }
      if (w["times"]) wigner_times.reset(w["times"]);
    }
  }

  if (root["entropy_scale"]) {
    if (auto s = r.text(root["entropy_scale"], "entropy_scale")) {
      if (*s == "automatic") cfg.entropy_scale = EntropyScale::automatic;
      else if (*s == "unscaled") cfg.entropy_scale = EntropyScale::unscaled;
      else if (*s == "doubled") cfg.entropy_scale = EntropyScale::doubled;
      else r.fail(root["entropy_scale"], "entropy_scale must be automatic, unscaled or doubled");
    }
  }

  double tail = kDefaultTailMass;
  if (root["truncation"] && root["truncation"].IsMap() && root["truncation"]["tail_mass_tolerance"]) {
    const auto& tn = root["truncation"]["tail_mass_tolerance"];
    if (auto v = r.real(tn, "truncation.tail_mass_tolerance")) {
      if (!(*v > 0.0 && *v < 1.0)) r.fail(tn, "truncation.tail_mass_tolerance must lie in (0, 1)");
      else tail = *v;
    }
  }

  if (root["integrator"]) {
    const auto& in = root["integrator"];
    if (r.keys(in, {"method", "rtol", "atol", "memory_budget_mb", "samples", "seed"}, "integrator")) {
      if (in["method"]) {
        if (auto s = r.text(in["method"], "integrator.method")) {
          if (*s == "master_equation") cfg.integrator.method = IntegratorConfig::Method::master_equation;
          else if (*s == "trajectories") cfg.integrator.method = IntegratorConfig::Method::trajectories;
          else r.fail(in["method"], "integrator.method must be master_equation or trajectories");
        }
      }
      auto positive = [&](const char* key, double& dst) {
        if (!in[key]) return;
        if (auto v = r.real(in[key], std::string("integrator.") + key)) {
          if (*v <= 0.0) r.fail(in[key], std::string("integrator.") + key + " must be > 0");
          else dst = *v;
        }
      };
      positive("rtol", cfg.integrator.rtol);
      positive("atol", cfg.integrator.atol);
      auto count = [&](const char* key, auto& dst) {
        if (!in[key]) return;
        if (auto v = r.integer(in[key], std::string("integrator.") + key)) {
          if (*v < 1) r.fail(in[key], std::string("integrator.") + key + " must be >= 1");
          else dst = static_cast<std::remove_reference_t<decltype(dst)>>(*v);
        }
      };
      count("memory_budget_mb", cfg.integrator.memory_budget_mb);
      count("samples", cfg.integrator.samples);
      count("seed", cfg.integrator.seed);
    }
  }

  if (root["swap"]) {
    const auto& sw = root["swap"];
    SwapSweepConfig swap;
    if (r.keys(sw, {"alpha_abs", "phase_pi", "c0", "c1"}, "swap")) {
      if (!sw["alpha_abs"]) {
        r.fail(sw, "swap.alpha_abs is required");
      } else {
        swap.alpha_abs = r.real_list(sw["alpha_abs"], "swap.alpha_abs");
        if (swap.alpha_abs.empty()) r.fail(sw["alpha_abs"], "swap.alpha_abs must not be empty");
        for (double a : swap.alpha_abs) {
          if (!(a > 0.0)) r.fail(sw["alpha_abs"], "swap.alpha_abs values must be > 0");
        }
      }
      if (sw["phase_pi"]) {
        if (auto v = r.real(sw["phase_pi"], "swap.phase_pi")) swap.phase_pi = *v;
      }
      if (sw["c0"]) {
        if (auto v = r.complex(sw["c0"], "swap.c0")) swap.c0 = *v;
      }
      if (sw["c1"]) {
        if (auto v = r.complex(sw["c1"], "swap.c1")) swap.c1 = *v;
      }
      if (std::abs(std::norm(swap.c0) + std::norm(swap.c1) - 1.0) > 1e-9) {
        r.fail(sw, "swap amplitudes must satisfy |c0|^2 + |c1|^2 = 1");
      }
    }
    cfg.swap = swap;
  }
  if (cfg.wants(OutputKind::swap_sweep) && !cfg.swap) {
    r.fail(root["outputs"], "output swap_sweep needs a swap section");
  }

  // Top-level series defaults, then the optional series list.
  SeriesConfig base;
  SeriesNodes top{root, root["initial"], root["gamma"], root["herald"], root["truncation"], wigner_times,
                  root["fidelity"]};
  bool base_truncation = false;
  if (evolution && !root["initial"] && !root["series"]) r.fail(root, "initial is required");
  read_series_fields(r, top, base, "", tail, base_truncation);

  struct Pending {
    SeriesConfig s;
    YAML::Node anchor;
    std::string ctx;
    bool explicit_truncation;
  };
  std::vector<Pending> pending;
  if (root["series"]) {
    const auto& list = root["series"];
    if (!list.IsSequence() || list.size() == 0) {
      r.fail(list, "series must be a non-empty list");
    } else {
      std::set<std::string> labels;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& e = list[i];
        const std::string ctx = "series[" + std::to_string(i) + "].";
        if (!r.keys(e, {"label", "initial", "gamma", "herald", "truncation", "wigner_times", "fidelity"},
                    "series[" + std::to_string(i) + "]")) {
          continue;
        }
        Pending p{base, e, ctx, base_truncation};
        if (!e["label"]) {
          r.fail(e, ctx + "label is required");
        } else if (auto l = r.text(e["label"], ctx + "label")) {
          if (!std::regex_match(*l, kLabelPattern)) {
            r.fail(e["label"], ctx + "label may only contain letters, digits, '.', '_' and '-'");
          } else if (!labels.insert(*l).second) {
            r.fail(e["label"], ctx + "label '" + *l + "' is repeated");
          }
          p.s.label = *l;
        }
        SeriesNodes nodes{e, e["initial"], e["gamma"], e["herald"], e["truncation"], e["wigner_times"],
                          e["fidelity"]};
        bool own = false;
        read_series_fields(r, nodes, p.s, ctx, tail, own);
        p.explicit_truncation = p.explicit_truncation || own;
        pending.push_back(std::move(p));
      }
    }
  } else {
    pending.push_back({base, root, "", base_truncation});
  }

  if (evolution) {
    for (auto& p : pending) {
      if (!p.explicit_truncation) {
        p.s.truncation = default_truncation(p.s.initial, p.s.herald, tail);
      } else {
        // Cutoffs not given explicitly fall back to the derived ones.
        const auto derived = default_truncation(p.s.initial, p.s.herald, tail);
        const YAML::Node tn = p.anchor["truncation"] ? p.anchor["truncation"] : root["truncation"];
        if (!tn["pump_cutoff"]) p.s.truncation.pump_cutoff = derived.pump_cutoff;
        if (!tn["stokes_cutoff"]) p.s.truncation.stokes_cutoff = derived.stokes_cutoff;
        if (!tn["phonon_cutoff"]) p.s.truncation.phonon_cutoff = derived.phonon_cutoff;
      }
      const YAML::Node at = p.anchor["truncation"] ? p.anchor["truncation"]
                                                   : (root["truncation"] ? root["truncation"] : p.anchor);
      check_tails(r, at, p.s, p.ctx);
      if (p.s.truncation.phonon_cutoff < p.s.truncation.pump_cutoff && p.s.gamma == 0.0) {
        r.fail(at, p.ctx + "truncation.phonon_cutoff must be >= pump_cutoff for closed evolution");
      }
      for (const auto& t : p.s.fidelity) {
        if (std::max(t.level_a, t.level_b) > p.s.truncation.phonon_cutoff) {
          r.fail(p.anchor, p.ctx + "fidelity target '" + t.label + "' uses a level above the phonon cutoff");
        }
      }
      cfg.series.push_back(std::move(p.s));
    }
    if (cfg.wants(OutputKind::wigner_grid)) {
      for (const auto& s : cfg.series) {
        if (s.wigner_times.empty()) {
          r.fail(root["outputs"], "output wigner_grid needs wigner.times (or series wigner_times) for series '" +
                                      s.label + "'");
        }
      }
    }
    if (cfg.wants(OutputKind::fidelity_report)) {
      for (const auto& s : cfg.series) {
        if (s.fidelity.empty()) {
          r.fail(root["outputs"], "output fidelity_report needs fidelity targets for series '" + s.label + "'");
        }
      }
    }
  }

  if (root["output_dir"]) {
    if (auto d = r.text(root["output_dir"], "output_dir")) cfg.output_dir = *d;
  } else {
    cfg.output_dir = std::filesystem::path("out") / cfg.name;
  }

  cfg.gt_grid.start = std::max(0.0, cfg.gt_grid.start);
  if (!r.problems().empty()) throw ValidationError(r.problems());
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError({path.string() + ": cannot read scenario file"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return validate_config(buf.str(), path.string());
}

}  // namespace tripartite
