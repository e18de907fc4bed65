#include "rqlab/kg.hpp"

#include <cmath>
#include <string>

namespace rqlab::kg {

using spectral::Complex;

RealField potential(const ComplexField& phi, const Params& p) {
  RealField rhs = spectral::dealias(spectral::abs_squared(phi));
  rhs -= p.doping(phi.grid());
  return spectral::solve_poisson_projected(rhs).field;
}

ComplexField kg_acceleration(const KGState& s, const Params& p) {
  if (p.upsilon <= 0.0)
    throw DegenerateParameterError("KG acceleration needs upsilon > 0; use the limit solver for upsilon = 0");
  if (p.epsilon <= 0.0) throw DegenerateParameterError("KG acceleration needs epsilon > 0");
  const double eps = p.epsilon;
  const RealField V = potential(s.phi, p);
  ComplexField acc = spectral::laplacian(s.phi);
  const Complex ieps(0.0, eps);
  const double coef = 2.0 / (eps * eps * p.upsilon * p.upsilon);
  for (std::size_t i = 0; i < acc.size(); ++i)
    acc[i] = coef * (ieps * s.phi_t[i] + 0.5 * eps * eps * acc[i] - V[i] * s.phi[i]);
  return acc;
}

double dispersion_omega(double kmag, const Params& p, Branch branch) {
  const double eps = p.epsilon, ups = p.upsilon;
  if (!(eps > 0.0)) throw DegenerateParameterError("dispersion needs epsilon > 0");
  const double root = std::sqrt(1.0 + eps * eps * ups * ups * kmag * kmag);
  if (branch == Branch::plus) return eps * kmag * kmag / (1.0 + root);  // cancellation-free form
  if (!(ups > 0.0)) throw DegenerateParameterError("the minus branch does not exist at upsilon = 0");
  return -(1.0 + root) / (eps * ups * ups);
}

KGState plane_wave(const GridPtr& grid, const std::array<int, 3>& m, double amplitude, const Params& p,
                   Branch branch) {
  if (!(amplitude > 0.0)) throw PreconditionError("plane wave amplitude must be > 0");
  const double b_expected = amplitude * amplitude;
  const RealField b = p.doping(grid);
  for (double v : b.values())
    if (std::abs(v - b_expected) > 1e-12 * b_expected)
      throw PreconditionError("plane wave needs b = amplitude^2 (got b = " + format_number(v) +
                              ", amplitude^2 = " + format_number(b_expected) + ")");
  const auto k = grid->lattice_vector(m);
  const double kmag = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
  const double w = dispersion_omega(kmag, p, branch);
  KGState s;
  s.phi = ComplexField::sample(grid, [&](const spectral::Point& x) {
    return amplitude * std::exp(Complex(0.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]));
  });
  s.phi_t = s.phi * Complex(0.0, -w);
  return s;
}

double stability_bound(const spectral::SpectralGrid& grid, const Params& p) {
  return 0.5 / std::abs(dispersion_omega(grid.max_wavenumber(), p, Branch::minus));
}

double auto_dt(const spectral::SpectralGrid& grid, const Params& p, double T) {
  const double bound = stability_bound(grid, p);
  if (T <= 0.0) return bound;
  return T / std::ceil(T / bound - 1e-12);
}

namespace {

struct Deriv {
  ComplexField dphi, dphi_t;
};

Deriv rhs(const ComplexField& phi, const ComplexField& phi_t, const Params& p) {
  KGState s{phi, phi_t, 0.0};
  return {phi_t, kg_acceleration(s, p)};
}

}  // namespace

KGState kg_step(const KGState& s, const Params& p, double dt) {
  const double bound = stability_bound(*s.phi.grid(), p);
  if (std::abs(dt) > bound * (1.0 + 1e-12))
    throw StabilityError("|dt| = " + format_number(std::abs(dt)) + " exceeds the stability bound " +
                         format_number(bound) + " = 0.5/|omega_-(k_max)|");
  const Complex h(dt, 0.0), h2(0.5 * dt, 0.0);
  const Deriv k1 = rhs(s.phi, s.phi_t, p);
  const Deriv k2 = rhs(s.phi + k1.dphi * h2, s.phi_t + k1.dphi_t * h2, p);
  const Deriv k3 = rhs(s.phi + k2.dphi * h2, s.phi_t + k2.dphi_t * h2, p);
  const Deriv k4 = rhs(s.phi + k3.dphi * h, s.phi_t + k3.dphi_t * h, p);
  KGState out = s;
  const Complex w(dt / 6.0, 0.0);
  for (std::size_t i = 0; i < out.phi.size(); ++i) {
    out.phi[i] += w * (k1.dphi[i] + 2.0 * k2.dphi[i] + 2.0 * k3.dphi[i] + k4.dphi[i]);
    out.phi_t[i] += w * (k1.dphi_t[i] + 2.0 * k2.dphi_t[i] + 2.0 * k3.dphi_t[i] + k4.dphi_t[i]);
  }
  out.time = s.time + dt;
  if (!out.phi.all_finite() || !out.phi_t.all_finite())
    throw StabilityError("KG state became non-finite at t = " + format_number(out.time));
  return out;
}

double charge(const KGState& s, const Params& p) {
  const double c = p.upsilon * p.upsilon * p.epsilon;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.phi.size(); ++i)
    sum += std::norm(s.phi[i]) - c * (std::conj(s.phi[i]) * s.phi_t[i]).imag();
  const auto& g = *s.phi.grid();
  return sum * g.volume() / static_cast<double>(g.size());
}

KGRun kg_solve(const KGState& init, const Params& p, double T, double dt) {
  const std::size_t steps = step_count(T, dt);
  if (steps > 0) {
    const double bound = stability_bound(*init.phi.grid(), p);
    if (dt > bound * (1.0 + 1e-12))
      throw StabilityError("dt = " + format_number(dt) + " exceeds the stability bound " + format_number(bound));
  }
  KGRun run;
  run.trajectory.dt = steps > 0 ? dt : (dt > 0.0 ? dt : 0.0);
  run.trajectory.states.reserve(steps + 1);
  run.trajectory.states.push_back(init);
  run.charge.push_back(charge(init, p));
  for (std::size_t j = 0; j < steps; ++j) {
    KGState next = kg_step(run.trajectory.states.back(), p, dt);
    next.time = init.time + static_cast<double>(j + 1) * dt;
    run.charge.push_back(charge(next, p));
    run.trajectory.states.push_back(std::move(next));
  }
  return run;
}

}  // namespace rqlab::kg
