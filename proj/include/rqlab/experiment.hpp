#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rqlab/config.hpp"
#include "rqlab/kg.hpp"
#include "rqlab/rqhd.hpp"

namespace rqlab::cli {

struct InitialData {
  rqhd::HydroInitialSpec hydro;
  kg::KGState kg;
};

/// Builds both representations of the configured initial data and checks
/// vacuum and charge balance.
InitialData build_initial(const ExperimentConfig& c, const GridPtr& grid, const Params& p);

/// run.dt, or the mode's automatic choice: the KG stability bound (kg,
/// equivalence, limits) or half the smallest grid spacing (rqhd); identities
/// use 1e-2 (the relativistic check is Richardson-extrapolated). The result always divides T.
double resolve_dt(const ExperimentConfig& c, const GridPtr& grid, const Params& p);

struct IdentityCheck {
  std::string name;
  double max_rel_error = 0.0;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  double relativistic_dt = 0.0;
  double relativistic_raw_error = 0.0;       // unextrapolated, at dt
  double relativistic_halving_ratio = 0.0;  // error(dt) / error(dt/2)
  double max_rel_error = 0.0;
};

IdentityReport run_identities(const ExperimentConfig& c, const GridPtr& grid, const Params& p, double dt);

struct RunResult {
  std::vector<std::string> outputs;
  nlohmann::json summary;
};

/// Runs one experiment and writes its artifacts plus manifest.json into
/// `outdir`. `config_text` is hashed into the manifest. Errors propagate after
/// error.json and the manifest have been written.
RunResult run_experiment(const ExperimentConfig& c, const std::filesystem::path& outdir,
                         const std::string& config_text);

/// 2 validation, 3 numerical, 4 I/O, 1 anything else.
int exit_code_for(const std::exception& e);
nlohmann::json error_json(const std::exception& e);

/// Summary of a finished run directory (manifest plus headline results).
nlohmann::json report_directory(const std::filesystem::path& dir);

std::string sha256_hex(const std::string& data);

}  // namespace rqlab::cli
