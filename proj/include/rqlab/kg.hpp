#pragma once

// Klein-Gordon-Poisson evolution in the modulated, nondimensional form
//
//   i eps phi_t + (eps^2/2) Lap phi - V phi = (eps^2 ups^2 / 2) phi_tt,
//   Lap V = |phi|^2 - b,
//
// integrated as a first-order system in (phi, phi_t) by classical RK4.

#include <array>
#include <vector>

#include "rqlab/params.hpp"
#include "rqlab/trajectory.hpp"

namespace rqlab::kg {

struct KGState {
  ComplexField phi;
  ComplexField phi_t;
  double time = 0.0;
};

enum class Branch { plus, minus };

/// Self-consistent potential: projected Poisson solve of dealias(|phi|^2) - b.
RealField potential(const ComplexField& phi, const Params& p);

/// phi_tt from the field equation. Needs eps > 0 and ups > 0.
ComplexField kg_acceleration(const KGState& s, const Params& p);

/// Roots of (eps ups^2/2) w^2 + w - eps k^2/2 = 0 (phi ~ exp(i(k.x - w t))).
/// At ups = 0 the plus branch is the Schroedinger limit eps k^2/2.
double dispersion_omega(double kmag, const Params& p, Branch branch);

/// Exact solution A exp(i k.x - i w t) with k = lattice vector `m`. Requires
/// b = A^2 so that V vanishes.
KGState plane_wave(const GridPtr& grid, const std::array<int, 3>& m, double amplitude, const Params& p,
                   Branch branch = Branch::plus);

/// Largest admissible |dt|: 0.5 / |w_-(k_max)|.
double stability_bound(const spectral::SpectralGrid& grid, const Params& p);
/// Largest dt <= stability_bound with T / dt integral.
double auto_dt(const spectral::SpectralGrid& grid, const Params& p, double T);

/// One RK4 step; dt may be negative (backward evolution).
KGState kg_step(const KGState& s, const Params& p, double dt);

/// Q = int |phi|^2 - ups^2 eps Im(conj(phi) phi_t), which equals
/// int (n - ups^2 n S_t) in hydrodynamic variables.
double charge(const KGState& s, const Params& p);

struct KGRun {
  Trajectory<KGState> trajectory;
  std::vector<double> charge;  // one entry per stored state
};

/// Integrates from init.time to init.time + T with step dt (T a multiple of dt).
KGRun kg_solve(const KGState& init, const Params& p, double T, double dt);

}  // namespace rqlab::kg
