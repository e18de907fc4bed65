#pragma once

// Madelung decomposition phi = sqrt(n) exp(i S / eps) with
//
//   grad S = eps Im(conj(phi) grad phi) / |phi|^2,
//   S_t    = eps Im(conj(phi) phi_t) / |phi|^2,
//   n_t    = 2 Re(conj(phi) phi_t).
//
// The phase is stored as a periodic part plus a lattice winding m, so that
// S(x) = S_periodic(x) + eps k(m).x with k(m)_i = 2 pi m_i / L_i.

#include <array>

#include "rqlab/kg.hpp"
#include "rqlab/params.hpp"

namespace rqlab::madelung {

using Winding = std::array<int, 3>;

struct HydroState {
  RealField n;
  RealField n_t;
  RealField S_periodic;
  Winding winding{};
  VectorField grad_S;
  RealField S_t;
  RealField V;
  double time = 0.0;
};

/// eps k(m) as a constant vector field.
VectorField winding_gradient(const GridPtr& grid, const Winding& m, double epsilon);
/// Full (multivalued) phase divided by eps, as used in exp(i S / eps).
RealField phase_over_eps(const GridPtr& grid, const RealField& S_periodic, const Winding& m, double epsilon);

/// Assembles a consistent HydroState: grad_S from S_periodic + winding and V
/// from the projected Poisson solve of n - b.
HydroState make_hydro(RealField n, RealField n_t, RealField S_periodic, const Winding& m, RealField S_t,
                      const Params& p, double time = 0.0);

/// Throws VacuumError if min(n) < the vacuum floor.
void require_vacuum_free(const RealField& n, const Params& p);

/// Maximum curl magnitude relative to the size of the velocity gradient, or
/// of |grad S| / l with l = extent / 2pi when that is larger (a uniform flow
/// has no gradient to compare against).
double irrotationality_defect(const VectorField& grad_S);

kg::KGState hydro_to_kg(const HydroState& h, const Params& p);
HydroState kg_to_hydro(const kg::KGState& s, const Params& p, double curl_tol = 1e-8);

struct KGInitialData {
  ComplexField phi0, phi1;
};

/// phi0 = sqrt(n0) e^{iS0/eps}, phi1 = (n1/(2 sqrt n0) + i sqrt(n0) S1/eps) e^{iS0/eps}.
KGInitialData initial_data_kg_from_hydro(const RealField& n0, const RealField& n1, const RealField& S0_periodic,
                                         const Winding& m, const RealField& S1, const Params& p);

struct HydroInitialData {
  RealField n0, n1;
  VectorField grad_S0;
  RealField S0_periodic;
  RealField S1;
  Winding winding{};
};

HydroInitialData initial_data_hydro_from_kg(const ComplexField& phi0, const ComplexField& phi1, const Params& p,
                                            double curl_tol = 1e-8);

/// sqrt(||dn||^2 + sum_i ||d(n d_i S)||^2) between two states, L^2 on the torus.
double hydro_distance(const HydroState& a, const HydroState& b);

}  // namespace rqlab::madelung
