#include "rqlab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rqlab::cli {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kg: return "kg";
    case Mode::rqhd: return "rqhd";
    case Mode::equivalence: return "equivalence";
    case Mode::limits: return "limits";
    case Mode::identities: return "identities";
  }
  return "?";
}

namespace {

const std::set<std::string> kFamilies{"constant", "plane-wave", "gaussian-bump", "sine-perturbation", "snapshot"};

// Field path -> 1-based line, so validation messages can point into the file.
using Lines = std::map<std::string, int>;

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

std::string where(const std::string& field, const Lines& lines) {
  auto it = lines.find(field);
  return it == lines.end() ? field : field + " (line " + std::to_string(it->second) + ")";
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field, const char* expected) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(field + " (line " + std::to_string(line_of(n)) + "): expected " + expected);
  }
}

template <class T>
std::vector<T> scalar_or_list(const YAML::Node& n, const std::string& field, const char* expected) {
  std::vector<T> out;
  if (n.IsSequence()) {
    for (const auto& item : n) out.push_back(scalar<T>(item, field, expected));
  } else {
    out.push_back(scalar<T>(n, field, expected));
  }
  return out;
}

void check_keys(const YAML::Node& section, const std::string& name, const std::set<std::string>& allowed) {
  if (!section.IsMap())
    throw ParseError(name + " (line " + std::to_string(line_of(section)) + "): expected a mapping");
  for (const auto& kv : section) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ValidationError("unknown key '" + key + "' in " + name + " (line " + std::to_string(line_of(kv.first)) + ")");
  }
}

void validate_impl(const ExperimentConfig& c, const Lines& lines) {
  auto fail = [&](const std::string& field, const std::string& msg) {
    throw ValidationError(where(field, lines) + ": " + msg);
  };
  const auto& g = c.grid;
  if (g.dim < 1 || g.dim > 3) fail("grid.dim", "dim must be 1, 2 or 3");
  if (g.points.size() != static_cast<std::size_t>(g.dim)) fail("grid.points", "need one entry per axis");
  if (g.extent.size() != static_cast<std::size_t>(g.dim)) fail("grid.extent", "need one entry per axis");
  for (auto p : g.points)
    if (p < 8 || p % 2 != 0 || p > 4096) fail("grid.points", "points per axis must be even and in [8, 4096]");
  for (auto e : g.extent)
    if (!(e > 0.0) || !std::isfinite(e)) fail("grid.extent", "extent must be > 0");

  const auto& p = c.params;
  if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon)) fail("params.epsilon", "epsilon must be > 0");
  if (!(p.upsilon >= 0.0) || !std::isfinite(p.upsilon)) fail("params.upsilon", "upsilon must be >= 0");
  if (!(p.b0 > 0.0) || !std::isfinite(p.b0)) fail("params.b0", "b0 must be > 0");
  if (!(p.nbar > 0.0) || !std::isfinite(p.nbar)) fail("params.nbar", "nbar must be > 0");
  if (p.n_floor && !(*p.n_floor >= 0.0 && *p.n_floor < p.nbar)) fail("params.n_floor", "n_floor must be in [0, nbar)");
  if (p.delta && !(*p.delta > 0.0 && *p.delta <= p.nbar)) fail("params.delta", "delta must be in (0, nbar]");
  const bool needs_ups = c.mode != Mode::limits;
  if (needs_ups && p.upsilon == 0.0)
    fail("params.upsilon", "upsilon must be > 0 for mode " + to_string(c.mode) + " (upsilon = 0 is a limit study)");

  const auto& in = c.initial;
  if (!kFamilies.count(in.family))
    fail("initial.family", "family must be constant, plane-wave, gaussian-bump, sine-perturbation or snapshot");
  if (!std::isfinite(in.amplitude)) fail("initial.amplitude", "amplitude must be finite");
  if (in.wavevector.size() != static_cast<std::size_t>(g.dim)) fail("initial.wavevector", "need one entry per axis");
  if (in.family == "plane-wave" && !(in.amplitude > 0.0)) fail("initial.amplitude", "plane-wave amplitude must be > 0");
  if (in.family == "gaussian-bump" && !(in.width > 0.0)) fail("initial.width", "width must be > 0");
  if (in.density && !(*in.density > 0.0)) fail("initial.density", "density must be > 0");
  if (in.family == "snapshot" && in.path.empty()) fail("initial.path", "snapshot family needs a path");

  const auto& r = c.run;
  if (!(r.T >= 0.0) || !std::isfinite(r.T) || r.T > 10.0) fail("run.T", "T must be in [0, 10]");
  if (r.dt) {
    if (!(*r.dt > 0.0) || !std::isfinite(*r.dt)) fail("run.dt", "dt must be > 0 or \"auto\"");
    const double q = r.T / *r.dt;
    if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q)) fail("run.dt", "T must be an integer multiple of dt");
  }
  if (!(r.tol > 0.0)) fail("run.tol", "tol must be > 0");
  if (r.max_iter < 1) fail("run.max_iter", "max_iter must be >= 1");
  if (!(r.compat_tol > 0.0)) fail("run.compat_tol", "compat_tol must be > 0");
  if (!(r.N > 0.0)) fail("run.N", "N must be > 0");
  if (!(r.C > 0.0)) fail("run.C", "C must be > 0");
  if (r.output.empty()) fail("run.output", "output directory must not be empty");

  if (c.mode == Mode::limits) {
    const auto& l = c.limits;
    if (l.kind != "semiclassical" && l.kind != "nonrelativistic" && l.kind != "combined")
      fail("limits.kind", "kind must be semiclassical, nonrelativistic or combined");
    if (l.values.size() < 3) fail("limits.values", "need >= 3 parameter values");
    for (std::size_t i = 0; i < l.values.size(); ++i) {
      if (!(l.values[i] > 0.0)) fail("limits.values", "values must be > 0");
      if (i > 0 && !(l.values[i] < l.values[i - 1])) fail("limits.values", "values must strictly decrease");
    }
  }
}

Mode parse_mode(const YAML::Node& n) {
  const auto s = scalar<std::string>(n, "mode", "a string");
  if (s == "kg") return Mode::kg;
  if (s == "rqhd") return Mode::rqhd;
  if (s == "equivalence") return Mode::equivalence;
  if (s == "limits") return Mode::limits;
  if (s == "identities") return Mode::identities;
  throw ValidationError("mode (line " + std::to_string(line_of(n)) +
                        "): mode must be kg, rqhd, equivalence, limits or identities");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("malformed YAML at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw ParseError("configuration must be a YAML mapping");
  check_keys(root, "top level", {"mode", "grid", "params", "initial", "run", "limits"});

  ExperimentConfig c;
  Lines lines;
  if (!root["mode"]) throw ValidationError("mode: required field missing");
  c.mode = parse_mode(root["mode"]);

  auto field = [&](const YAML::Node& section, const std::string& sec, const char* key) -> YAML::Node {
    YAML::Node n = section[key];
    if (n) lines[sec + "." + key] = line_of(n);
    return n;
  };

  if (auto g = root["grid"]) {
    check_keys(g, "grid", {"dim", "points", "extent"});
    if (auto n = field(g, "grid", "dim")) c.grid.dim = scalar<int>(n, "grid.dim", "an integer");
    if (auto n = field(g, "grid", "points")) c.grid.points = scalar_or_list<std::size_t>(n, "grid.points", "a positive integer");
    if (auto n = field(g, "grid", "extent")) c.grid.extent = scalar_or_list<double>(n, "grid.extent", "a number");
  }
  if (c.grid.dim >= 1 && c.grid.dim <= 3) {
    if (c.grid.points.size() == 1) c.grid.points.assign(c.grid.dim, c.grid.points[0]);
    if (c.grid.extent.size() == 1) c.grid.extent.assign(c.grid.dim, c.grid.extent[0]);
  }

  if (auto p = root["params"]) {
    check_keys(p, "params", {"epsilon", "upsilon", "b0", "nbar", "n_floor", "delta"});
    if (auto n = field(p, "params", "epsilon")) c.params.epsilon = scalar<double>(n, "params.epsilon", "a number");
    if (auto n = field(p, "params", "upsilon")) c.params.upsilon = scalar<double>(n, "params.upsilon", "a number");
    if (auto n = field(p, "params", "b0")) c.params.b0 = scalar<double>(n, "params.b0", "a number");
    if (auto n = field(p, "params", "nbar")) c.params.nbar = scalar<double>(n, "params.nbar", "a number");
    if (auto n = field(p, "params", "n_floor")) c.params.n_floor = scalar<double>(n, "params.n_floor", "a number");
    if (auto n = field(p, "params", "delta")) c.params.delta = scalar<double>(n, "params.delta", "a number");
  }

  if (auto in = root["initial"]) {
    check_keys(in, "initial", {"family", "amplitude", "wavevector", "width", "phase_amplitude", "density", "path"});
    if (auto n = field(in, "initial", "family")) c.initial.family = scalar<std::string>(n, "initial.family", "a string");
    if (auto n = field(in, "initial", "amplitude")) c.initial.amplitude = scalar<double>(n, "initial.amplitude", "a number");
    if (auto n = field(in, "initial", "wavevector"))
      c.initial.wavevector = scalar_or_list<int>(n, "initial.wavevector", "integers");
    if (auto n = field(in, "initial", "width")) c.initial.width = scalar<double>(n, "initial.width", "a number");
    if (auto n = field(in, "initial", "phase_amplitude"))
      c.initial.phase_amplitude = scalar<double>(n, "initial.phase_amplitude", "a number");
    if (auto n = field(in, "initial", "density")) c.initial.density = scalar<double>(n, "initial.density", "a number");
    if (auto n = field(in, "initial", "path")) c.initial.path = scalar<std::string>(n, "initial.path", "a string");
  }
  if (c.initial.wavevector.size() < static_cast<std::size_t>(std::max(c.grid.dim, 0)))
    c.initial.wavevector.resize(c.grid.dim, 0);

  if (auto r = root["run"]) {
    check_keys(r, "run", {"T", "dt", "tol", "max_iter", "compat_tol", "N", "C", "output"});
    if (auto n = field(r, "run", "T")) c.run.T = scalar<double>(n, "run.T", "a number");
    if (auto n = field(r, "run", "dt")) {
      if (n.IsScalar() && n.Scalar() == "auto")
        c.run.dt.reset();
      else
        c.run.dt = scalar<double>(n, "run.dt", "a number or \"auto\"");
    }
    if (auto n = field(r, "run", "tol")) c.run.tol = scalar<double>(n, "run.tol", "a number");
    if (auto n = field(r, "run", "max_iter")) c.run.max_iter = scalar<int>(n, "run.max_iter", "an integer");
    if (auto n = field(r, "run", "compat_tol")) c.run.compat_tol = scalar<double>(n, "run.compat_tol", "a number");
    if (auto n = field(r, "run", "N")) c.run.N = scalar<double>(n, "run.N", "a number");
    if (auto n = field(r, "run", "C")) c.run.C = scalar<double>(n, "run.C", "a number");
    if (auto n = field(r, "run", "output")) c.run.output = scalar<std::string>(n, "run.output", "a path");
  }

  if (auto l = root["limits"]) {
    check_keys(l, "limits", {"kind", "values"});
    if (auto n = field(l, "limits", "kind")) c.limits.kind = scalar<std::string>(n, "limits.kind", "a string");
    if (auto n = field(l, "limits", "values")) c.limits.values = scalar_or_list<double>(n, "limits.values", "numbers");
  } else if (c.mode == Mode::limits) {
    throw ValidationError("limits: section required for mode limits");
  }

  validate_impl(c, lines);
  return c;
}

void validate(const ExperimentConfig& c) { validate_impl(c, {}); }

std::string read_config_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_config_text(path)); }

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << to_string(c.mode);

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dim" << YAML::Value << c.grid.dim;
  out << YAML::Key << "points" << YAML::Value << YAML::Flow << c.grid.points;
  out << YAML::Key << "extent" << YAML::Value << YAML::Flow << c.grid.extent;
  out << YAML::EndMap;

  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "epsilon" << YAML::Value << c.params.epsilon;
  out << YAML::Key << "upsilon" << YAML::Value << c.params.upsilon;
  out << YAML::Key << "b0" << YAML::Value << c.params.b0;
  out << YAML::Key << "nbar" << YAML::Value << c.params.nbar;
  if (c.params.n_floor) out << YAML::Key << "n_floor" << YAML::Value << *c.params.n_floor;
  if (c.params.delta) out << YAML::Key << "delta" << YAML::Value << *c.params.delta;
  out << YAML::EndMap;

  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << c.initial.family;
  out << YAML::Key << "amplitude" << YAML::Value << c.initial.amplitude;
  out << YAML::Key << "wavevector" << YAML::Value << YAML::Flow << c.initial.wavevector;
  out << YAML::Key << "width" << YAML::Value << c.initial.width;
  out << YAML::Key << "phase_amplitude" << YAML::Value << c.initial.phase_amplitude;
  if (c.initial.density) out << YAML::Key << "density" << YAML::Value << *c.initial.density;
  if (!c.initial.path.empty()) out << YAML::Key << "path" << YAML::Value << c.initial.path;
  out << YAML::EndMap;

  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "T" << YAML::Value << c.run.T;
  if (c.run.dt)
    out << YAML::Key << "dt" << YAML::Value << *c.run.dt;
  else
    out << YAML::Key << "dt" << YAML::Value << "auto";
  out << YAML::Key << "tol" << YAML::Value << c.run.tol;
  out << YAML::Key << "max_iter" << YAML::Value << c.run.max_iter;
  out << YAML::Key << "compat_tol" << YAML::Value << c.run.compat_tol;
  out << YAML::Key << "N" << YAML::Value << c.run.N;
  out << YAML::Key << "C" << YAML::Value << c.run.C;
  out << YAML::Key << "output" << YAML::Value << c.run.output;
  out << YAML::EndMap;

  if (c.mode == Mode::limits || !c.limits.values.empty()) {
    out << YAML::Key << "limits" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << c.limits.kind;
    out << YAML::Key << "values" << YAML::Value << YAML::Flow << c.limits.values;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

GridPtr make_grid(const ExperimentConfig& c) { return spectral::SpectralGrid::make(c.grid.points, c.grid.extent); }

Params make_params(const ExperimentConfig& c) {
  Params p;
  p.epsilon = c.params.epsilon;
  p.upsilon = c.params.upsilon;
  p.b0 = c.params.b0;
  p.nbar = c.params.nbar;
  p.n_floor = c.params.n_floor.value_or(-1.0);
  p.delta = c.params.delta.value_or(-1.0);
  p.compat_tol = c.run.compat_tol;
  return p;
}

}  // namespace rqlab::cli
