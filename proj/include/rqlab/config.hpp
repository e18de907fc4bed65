#pragma once

// Experiment configuration, stored as YAML:
//
//   mode: kg | rqhd | equivalence | limits | identities
//   grid:    {dim, points, extent}          points/extent: scalar or per-axis list
//   params:  {epsilon, upsilon, b0, nbar, n_floor, delta}
//   initial: {family, amplitude, wavevector, width, phase_amplitude, density, path}
//   run:     {T, dt ("auto" or number), tol, max_iter, compat_tol, N, C, output}
//   limits:  {kind, values}                 limits mode only

#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "rqlab/params.hpp"

namespace rqlab::cli {

enum class Mode { kg, rqhd, equivalence, limits, identities };
std::string to_string(Mode m);

struct GridSpec {
  int dim = 1;
  std::vector<std::size_t> points{128};
  std::vector<double> extent{2.0 * std::numbers::pi};
  bool operator==(const GridSpec&) const = default;
};

struct ParamSpec {
  double epsilon = 1.0;
  double upsilon = 1.0;
  double b0 = 1.0;
  double nbar = 1.0;
  std::optional<double> n_floor;
  std::optional<double> delta;
  bool operator==(const ParamSpec&) const = default;
};

/// Initial-data families (hydrodynamic form, S1 and n1 zero unless stated):
///   constant           n0 = density (default b0)
///   plane-wave         phi = A exp(i k.x), plus branch; needs b0 = A^2
///   gaussian-bump      n0 = nbar (1 + A (G - mean G)), G a periodic Gaussian of the given width at the box centre
///   sine-perturbation  n0 = nbar (1 + A sin(k.x)), S0 = phase_amplitude cos(k.x)
///   snapshot           real snapshot -> n0, complex snapshot -> phi0 (phi1 = 0)
struct InitialSpec {
  std::string family = "constant";
  double amplitude = 0.0;
  std::vector<int> wavevector{1};
  double width = 0.5;
  double phase_amplitude = 0.0;
  std::optional<double> density;
  std::string path;
  bool operator==(const InitialSpec&) const = default;
};

struct RunSpec {
  double T = 0.1;
  std::optional<double> dt;  // empty means auto
  double tol = 1e-9;
  int max_iter = 50;
  double compat_tol = 1e-10;
  double N = 1.0;
  double C = 1.0;
  std::string output = "out";
  bool operator==(const RunSpec&) const = default;
};

struct LimitSpec {
  std::string kind = "nonrelativistic";
  std::vector<double> values;
  bool operator==(const LimitSpec&) const = default;
};

struct ExperimentConfig {
  Mode mode = Mode::kg;
  GridSpec grid;
  ParamSpec params;
  InitialSpec initial;
  RunSpec run;
  LimitSpec limits;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates. ParseError for malformed YAML or wrong types,
/// ValidationError for violated invariants; messages name the field and line.
ExperimentConfig parse_config(const std::string& text);
/// Reads a file; IoError names the path if it cannot be read.
std::string read_config_text(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& c);
void validate(const ExperimentConfig& c);

GridPtr make_grid(const ExperimentConfig& c);
Params make_params(const ExperimentConfig& c);

}  // namespace rqlab::cli
