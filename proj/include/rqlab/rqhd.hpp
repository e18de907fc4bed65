#pragma once

// The relativistic quantum hydrodynamic system
//
//   d_t n + div(n grad S) - ups^2 d_t(n S_t) = 0,
//   d_t(n grad S) + div(n grad S (x) grad S) - (eps^2/2) n grad(Lap sqrt n / sqrt n) + n grad V
//     - (ups^2/2) [2 d_t(S_t grad S n) - (eps^2/2) d_t(n grad d_t log n)] = 0,
//   Lap V = n - b,
//
// its hyperbolic-elliptic reformulation in (psi, Psi, Phi) = (S, sqrt n - sqrt nbar, V)
// with a = Psi + sqrt nbar,
//
//   ups^2 psi_tt - Lap psi = f = [(a^2)_t (1 - ups^2 psi_t) + grad(a^2).grad psi] / a^2,
//   eps^2 (ups^2 Psi_tt - Lap Psi) = g = a (ups^2 psi_t^2 - 2 psi_t - |grad psi|^2 - 2 Phi),
//   Lap Phi = h = a^2 - b,
//
// and the Picard iteration that freezes f, g, h at the previous iterate.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "rqlab/madelung.hpp"
#include "rqlab/params.hpp"
#include "rqlab/trajectory.hpp"

namespace rqlab::rqhd {

using madelung::HydroState;
using madelung::Winding;

struct ReformState {
  RealField psi;  // periodic part of S; the linear part is eps k(winding).x
  RealField Psi;
  RealField Phi;
  RealField psi_t;
  RealField Psi_t;
  Winding winding{};
  double time = 0.0;
};

ReformState reformulate(const HydroState& h, const Params& p);
/// Inverse of reformulate. S_periodic is psi with its spatial mean removed.
HydroState unreformulate(const ReformState& r, const Params& p);
Trajectory<HydroState> unreformulate(const Trajectory<ReformState>& U, const Params& p);

/// Pointwise source terms at one time node, split so that the relativistic
/// parts can be switched off structurally.
struct SourceTerms {
  RealField f_classical;     // [2a Psi_t + 2a grad Psi . grad psi] / a^2
  RealField f_relativistic;  // -ups^2 2a Psi_t psi_t / a^2
  RealField g_classical;     // a (-2 psi_t - |grad psi|^2 - 2 Phi)
  RealField g_relativistic;  // ups^2 a psi_t^2
  RealField h;               // a^2 - b
};

SourceTerms source_terms(const ReformState& u, const Params& p);

/// Dealiased f, g, h from split terms.
struct Sources {
  RealField f, g, h;
};
Sources combine(const SourceTerms& t);

struct SourceTriple {
  Trajectory<RealField> f, g, h;
};

SourceTriple assemble_sources(const Trajectory<ReformState>& U, const Params& p);

struct WaveSample {
  RealField u, u_t;
};

/// u'' - speed^2 Lap u = F on the time grid of F (F.size() >= 1 nodes), mode by
/// mode: exact propagator for the homogeneous part, trapezoid for Duhamel.
Trajectory<WaveSample> linear_wave_solve(const RealField& u0, const RealField& u1, const Trajectory<RealField>& F,
                                         double speed = 1.0);

struct PicardInit {
  RealField psi0, psi1, Psi0, Psi1;
  Winding winding{};
};

/// (psi0, psi1, Psi0, Psi1) = (S0, S1, sqrt n0 - sqrt nbar, n1 / (2 sqrt n0)).
PicardInit picard_init_from_hydro(const RealField& n0, const RealField& n1, const RealField& S0_periodic,
                                  const Winding& m, const RealField& S1, const Params& p);

/// U^1: initial data held constant in time, Phi from a0^2 - b.
Trajectory<ReformState> initial_iterate(const PicardInit& init, const Params& p, double T, double dt);

/// One Picard step U_p -> U_{p+1}.
Trajectory<ReformState> picard_iterate(const Trajectory<ReformState>& Up, const PicardInit& init, const Params& p);

/// sup over time nodes of (||d psi||_{H1}^2 + ||d Psi||_{H1}^2)^{1/2}.
double successive_difference(const Trajectory<ReformState>& a, const Trajectory<ReformState>& b);

struct IterationReport {
  int iterations = 0;
  std::vector<double> successive_diffs;
  bool converged = false;
  double contraction_ratio_estimate = 0.0;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, IterationReport report)
      : Error("NoConvergenceError", what, ErrorClass::numerical), report_(std::move(report)) {}
  const IterationReport& report() const noexcept { return report_; }

 private:
  IterationReport report_;
};

struct NormRow {
  double t, psi_H4, psit_H3, psitt_H2, Psi_H4, Psit_H3, Psitt_H2, Phi_H4, min_n, Q;
};

struct WellposednessEstimates {
  double a0 = 0.0;
  double I0 = 0.0;
  double M0 = 0.0;
  double M1 = 0.0;
  double Tstar = 0.0;
  double delta = 0.0;
  double N = 1.0;
  double C = 1.0;
  /// max over t of (||Psi_t|| + ||Psi||_{H1}) / (C (||Psi1|| + ||Psi0||_{H1} + int ||G||)).
  double energy_ratio_max = 0.0;
  std::vector<NormRow> norm_history;
};

struct PicardOptions {
  double tol = 1e-9;
  int max_iter = 50;
  double N = 1.0;
  double C = 1.0;
  double memory_budget_bytes = 2.0 * 1024 * 1024 * 1024;
};

struct PicardResult {
  Trajectory<ReformState> trajectory;
  IterationReport report;
  WellposednessEstimates estimates;
};

PicardResult picard_solve(const PicardInit& init, const Params& p, double T, double dt,
                          const PicardOptions& opt = {});

WellposednessEstimates monitor_estimates(const Trajectory<ReformState>& U, const PicardInit& init, const Params& p,
                                         double N = 1.0, double C = 1.0);

/// Sum of the five initial norms: ||a0^2 - b||_{L2} + ||psi1||_{H3} + ||Psi1||_{H3}
/// + ||psi0||_{H4} + ||Psi0||_{H4}.
double initial_norm_I0(const PicardInit& init, const Params& p);

// --- residuals and identities ------------------------------------------------

RealField residual_continuity(const Trajectory<HydroState>& traj, std::size_t index, const Params& p);
VectorField residual_momentum(const Trajectory<HydroState>& traj, std::size_t index, const Params& p);

enum class StressForm { potential, tensor };
/// (eps^2/2) n grad(Lap sqrt n / sqrt n) or (eps^2/4) div(n grad grad log n).
VectorField quantum_stress_divergence(const RealField& n, const Params& p, StressForm form);

enum class RelativisticForm { potential, flux };
/// (eps^2 ups^2/2) n grad(d_tt sqrt n / sqrt n) or (eps^2 ups^2/4) d_t(n grad(n_t / n)).
VectorField relativistic_term(const Trajectory<HydroState>& traj, std::size_t index, const Params& p,
                              RelativisticForm form);

/// Q = int (n - ups^2 n S_t).
double conserved_charge(const HydroState& h, const Params& p);

// --- KG / Picard equivalence ------------------------------------------------

struct HydroInitialSpec {
  RealField n0, n1, S0_periodic, S1;
  Winding winding{};
};

struct EquivalenceReport {
  double T = 0.0;
  double dt = 0.0;
  double distance = 0.0;  // sup over time nodes of madelung::hydro_distance
  std::vector<double> distances;
  IterationReport picard;
  double kg_charge_drift = 0.0;        // max |Q(t) - Q(0)| / |Q(0)|
  double continuity_residual = 0.0;    // max over interior nodes of the L2 norm (Picard side)
  double momentum_residual = 0.0;
};

/// Solves the same data with kg_solve and picard_solve and compares their
/// hydrodynamic images.
EquivalenceReport equivalence(const HydroInitialSpec& data, const Params& p, double T, double dt,
                              const PicardOptions& opt = {});

// --- serialization -----------------------------------------------------------

void write_report_jsonl(std::ostream& os, const IterationReport& r, const WellposednessEstimates& e);
void write_norm_history_csv(std::ostream& os, const std::vector<NormRow>& rows);

}  // namespace rqlab::rqhd
