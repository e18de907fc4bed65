#include "rqlab/madelung.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rqlab::madelung {

using spectral::Complex;

VectorField winding_gradient(const GridPtr& grid, const Winding& m, double epsilon) {
  const auto k = grid->lattice_vector(m);
  VectorField out(grid);
  for (int a = 0; a < grid->dim(); ++a) out[a] = RealField::constant(grid, epsilon * k[a]);
  return out;
}

RealField phase_over_eps(const GridPtr& grid, const RealField& S_periodic, const Winding& m, double epsilon) {
  const auto k = grid->lattice_vector(m);
  RealField out(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto x = grid->coordinate(i);
    out[i] = S_periodic[i] / epsilon + k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
  }
  return out;
}

void require_vacuum_free(const RealField& n, const Params& p) {
  const double lo = spectral::min_value(n);
  if (!(lo >= p.vacuum_floor()))
    throw VacuumError("density reaches " + format_number(lo) + " < n_floor = " + format_number(p.vacuum_floor()) +
                      "; the phase S is undefined at vacuum");
}

HydroState make_hydro(RealField n, RealField n_t, RealField S_periodic, const Winding& m, RealField S_t,
                      const Params& p, double time) {
  const auto grid = n.grid();
  HydroState h;
  h.grad_S = spectral::gradient(S_periodic) + winding_gradient(grid, m, p.epsilon);
  h.V = spectral::solve_poisson_projected(n - p.doping(grid)).field;
  h.n = std::move(n);
  h.n_t = std::move(n_t);
  h.S_periodic = std::move(S_periodic);
  h.winding = m;
  h.S_t = std::move(S_t);
  h.time = time;
  return h;
}

double irrotationality_defect(const VectorField& g) {
  const int d = g.dim();
  if (d < 2) return 0.0;
  double scale = 0.0;
  std::vector<std::vector<RealField>> D(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      D[i].push_back(spectral::derivative(g[i], j));
      scale = std::max(scale, D[i][j].max_abs());
    }
  for (int i = 0; i < d; ++i)
    scale = std::max(scale, g[i].max_abs() * 2.0 * std::numbers::pi / g.grid()->extent(i));
  double worst = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) worst = std::max(worst, (D[j][i] - D[i][j]).max_abs());
  return scale > 0.0 ? worst / scale : 0.0;
}

namespace {

struct PhaseParts {
  VectorField grad_S;
  RealField S_periodic;
  Winding winding{};
};

// grad S from phi, split into a lattice winding and the gradient of a
// mean-zero periodic potential.
PhaseParts phase_parts(const ComplexField& phi, const RealField& n, const Params& p, double curl_tol) {
  const auto grid = phi.grid();
  const double eps = p.epsilon;
  const auto dphi = spectral::gradient(phi);
  PhaseParts out;
  out.grad_S = VectorField(grid);
  for (int a = 0; a < grid->dim(); ++a)
    for (std::size_t i = 0; i < phi.size(); ++i)
      out.grad_S[a][i] = eps * (std::conj(phi[i]) * dphi[a][i]).imag() / n[i];
  const double defect = irrotationality_defect(out.grad_S);
  if (defect > curl_tol)
    throw IrrotationalityError("curl(grad S) is " + format_number(defect) + " relative to grad(grad S), above " +
                               format_number(curl_tol) + "; the state carries vorticity");
  for (int a = 0; a < grid->dim(); ++a) {
    const double per_mode = 2.0 * std::numbers::pi * eps / grid->extent(a);
    out.winding[a] = static_cast<int>(std::lround(out.grad_S[a].mean() / per_mode));
  }
  const VectorField periodic = out.grad_S - winding_gradient(grid, out.winding, eps);
  out.S_periodic = spectral::solve_poisson_projected(spectral::divergence(periodic)).field;
  return out;
}

}  // namespace

HydroState kg_to_hydro(const kg::KGState& s, const Params& p, double curl_tol) {
  const RealField n = spectral::abs_squared(s.phi);
  require_vacuum_free(n, p);
  auto parts = phase_parts(s.phi, n, p, curl_tol);
  HydroState h;
  h.n_t = RealField(s.phi.grid());
  h.S_t = RealField(s.phi.grid());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const Complex c = std::conj(s.phi[i]) * s.phi_t[i];
    h.n_t[i] = 2.0 * c.real();
    h.S_t[i] = p.epsilon * c.imag() / n[i];
  }
  h.V = spectral::solve_poisson_projected(n - p.doping(n.grid())).field;
  h.n = n;
  h.grad_S = std::move(parts.grad_S);
  h.S_periodic = std::move(parts.S_periodic);
  h.winding = parts.winding;
  h.time = s.time;
  return h;
}

kg::KGState hydro_to_kg(const HydroState& h, const Params& p) {
  auto d = initial_data_kg_from_hydro(h.n, h.n_t, h.S_periodic, h.winding, h.S_t, p);
  return {std::move(d.phi0), std::move(d.phi1), h.time};
}

KGInitialData initial_data_kg_from_hydro(const RealField& n0, const RealField& n1, const RealField& S0_periodic,
                                         const Winding& m, const RealField& S1, const Params& p) {
  require_vacuum_free(n0, p);
  const auto grid = n0.grid();
  const RealField theta = phase_over_eps(grid, S0_periodic, m, p.epsilon);
  KGInitialData out{ComplexField(grid), ComplexField(grid)};
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double r = std::sqrt(n0[i]);
    const Complex e = std::polar(1.0, theta[i]);
    out.phi0[i] = r * e;
    out.phi1[i] = Complex(n1[i] / (2.0 * r), r * S1[i] / p.epsilon) * e;
  }
  return out;
}

HydroInitialData initial_data_hydro_from_kg(const ComplexField& phi0, const ComplexField& phi1, const Params& p,
                                            double curl_tol) {
  const auto h = kg_to_hydro(kg::KGState{phi0, phi1, 0.0}, p, curl_tol);
  return {h.n, h.n_t, h.grad_S, h.S_periodic, h.S_t, h.winding};
}

double hydro_distance(const HydroState& a, const HydroState& b) {
  const double dn = spectral::l2_norm(a.n - b.n);
  double sum = dn * dn;
  for (int i = 0; i < a.grad_S.dim(); ++i) {
    const double dj = spectral::l2_norm(a.n * a.grad_S[i] - b.n * b.grad_S[i]);
    sum += dj * dj;
  }
  return std::sqrt(sum);
}

}  // namespace rqlab::madelung
