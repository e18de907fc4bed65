#pragma once

// Formal singular limits of the RQHD system:
//   semiclassical   eps -> 0   (relativistic Euler-Poisson),
//   nonrelativistic ups -> 0   (quantum Euler-Poisson),
//   combined        both -> 0  (Euler-Poisson).
//
// Limit systems are integrated by RK4 on (n, S) with the eliminated terms
// switched off structurally:
//
//   X   = |grad S|^2 + 2V - eps^2 Lap sqrt(n)/sqrt(n)     (last term only if eps > 0)
//   S_t = -X / (1 + sqrt(1 + ups^2 X))
//   n_t (1 - ups^2 S_t) = -div(n grad S) + ups^2 n S_tt.

#include <iosfwd>
#include <string>
#include <vector>

#include "rqlab/madelung.hpp"
#include "rqlab/params.hpp"
#include "rqlab/trajectory.hpp"

namespace rqlab::limits {

using madelung::HydroState;

enum class LimitKind { semiclassical, nonrelativistic, combined };

std::string to_string(LimitKind k);
LimitKind parse_limit_kind(const std::string& s);

/// Parameters with the limiting parameter(s) set to zero.
Params switch_off(LimitKind kind, Params p);
/// Parameters of the family member with limiting parameter(s) equal to `value`.
Params at_value(LimitKind kind, Params p, double value);

struct LimitInit {
  RealField n0;
  RealField S0_periodic;
  madelung::Winding winding{};
};

/// (n_t, S_t) of the limit system at one state. Needs eps * ups = 0.
struct LimitRates {
  RealField n_t, S_t, V;
  VectorField grad_S;
};
LimitRates limit_rates(const RealField& n, const RealField& S, const madelung::Winding& m, const Params& p);

/// Integrates the limit system for `kind` (parameters are switched off here).
Trajectory<HydroState> solve_limit_system(LimitKind kind, const LimitInit& init, const Params& p, double T, double dt);

struct FitResult {
  double order = 0.0;
  double residual = 0.0;
};

/// Least-squares slope of log(discrepancy) against log(param). NaN if every
/// discrepancy is zero; FitError if some but not all are nonpositive.
FitResult fit_order(const std::vector<double>& params, const std::vector<double>& discrepancies);

struct ConvergenceTable {
  LimitKind kind = LimitKind::nonrelativistic;
  std::vector<double> params;
  std::vector<double> discrepancies;
  std::vector<double> min_n;
  std::vector<std::string> failures;  // empty string for successful runs
  double fitted_order = 0.0;
  double fit_residual = 0.0;
  double dt = 0.0;
  double T = 0.0;
};

class PartialStudyError : public StudyError {
 public:
  PartialStudyError(const std::string& what, ConvergenceTable table) : StudyError(what), table_(std::move(table)) {}
  const ConvergenceTable& table() const noexcept { return table_; }

 private:
  ConvergenceTable table_;
};

/// Largest dt that is stable for every KG family member and divides T.
double study_auto_dt(LimitKind kind, const spectral::SpectralGrid& grid, const Params& base,
                     const std::vector<double>& values, double T);

/// For each value, runs KG (the RQHD side, through its Madelung image) and the
/// limit system from identical well-prepared data and records the sup-in-time
/// distance of (n, n grad S).
ConvergenceTable convergence_study(LimitKind kind, const LimitInit& init, const Params& base,
                                   const std::vector<double>& values, double T, double dt);

void write_table_csv(std::ostream& os, const ConvergenceTable& t);
void write_summary_json(std::ostream& os, const ConvergenceTable& t);

}  // namespace rqlab::limits
