#include "rqlab/rqhd.hpp"

#include <cmath>
#include <string>

#include "rqlab/parallel.hpp"

namespace rqlab::rqhd {

namespace sp = spectral;

namespace {

RealField amplitude(const RealField& Psi, const Params& p) {
  RealField a = Psi + std::sqrt(p.nbar);
  const double lo = sp::min_value(a);
  if (!(lo > 0.0) || !(lo * lo >= p.vacuum_floor()))
    throw VacuumError("Psi + sqrt(nbar) reaches " + format_number(lo) + "; the iterate touches vacuum");
  return a;
}

VectorField full_phase_gradient(const RealField& psi, const Winding& m, const Params& p) {
  return sp::gradient(psi) + madelung::winding_gradient(psi.grid(), m, p.epsilon);
}

void require_interior(const Trajectory<HydroState>& traj, std::size_t index) {
  if (index < 1 || index + 1 >= traj.size())
    throw IndexError("centered time differences need 1 <= index <= " +
                     std::to_string(traj.size() < 2 ? 0 : traj.size() - 2) + ", got " + std::to_string(index));
  if (!(traj.dt > 0.0)) throw PreconditionError("trajectory has no time step");
}

RealField centered(const RealField& next, const RealField& prev, double dt) { return (next - prev) * (0.5 / dt); }

// n grad(n_t / n), the flux form's time-differentiated quantity.
VectorField log_rate_flux(const HydroState& h) { return h.n * sp::gradient(h.n_t / h.n); }

}  // namespace

ReformState reformulate(const HydroState& h, const Params& p) {
  madelung::require_vacuum_free(h.n, p);
  const RealField root = h.n.map([](double v) { return std::sqrt(v); });
  ReformState r;
  r.psi = h.S_periodic;
  r.Psi = root - std::sqrt(p.nbar);
  r.Phi = h.V;
  r.psi_t = h.S_t;
  r.Psi_t = h.n_t / (root * 2.0);
  r.winding = h.winding;
  r.time = h.time;
  return r;
}

HydroState unreformulate(const ReformState& r, const Params& p) {
  const RealField a = amplitude(r.Psi, p);
  HydroState h;
  h.n = a * a;
  madelung::require_vacuum_free(h.n, p);
  h.n_t = a * r.Psi_t * 2.0;
  h.S_periodic = r.psi - r.psi.mean();
  h.winding = r.winding;
  h.grad_S = full_phase_gradient(r.psi, r.winding, p);
  h.S_t = r.psi_t;
  h.V = r.Phi;
  h.time = r.time;
  return h;
}

Trajectory<HydroState> unreformulate(const Trajectory<ReformState>& U, const Params& p) {
  Trajectory<HydroState> out;
  out.dt = U.dt;
  out.states.resize(U.size());
  parallel_for(U.size(), [&](std::size_t j) { out.states[j] = unreformulate(U.states[j], p); });
  return out;
}

SourceTerms source_terms(const ReformState& u, const Params& p) {
  const RealField a = amplitude(u.Psi, p);
  const VectorField G = full_phase_gradient(u.psi, u.winding, p);
  const VectorField gradPsi = sp::gradient(u.Psi);
  const double ups2 = p.upsilon * p.upsilon;
  const RealField b = p.doping(u.Psi.grid());
  const std::size_t size = a.size();

  SourceTerms t{RealField(a.grid()), RealField(a.grid()), RealField(a.grid()), RealField(a.grid()),
                RealField(a.grid())};
  const RealField grad_dot = sp::dot(gradPsi, G);
  const RealField G2 = sp::dot(G, G);
  for (std::size_t i = 0; i < size; ++i) {
    t.f_classical[i] = (2.0 * u.Psi_t[i] + 2.0 * grad_dot[i]) / a[i];
    t.f_relativistic[i] = -ups2 * 2.0 * u.Psi_t[i] * u.psi_t[i] / a[i];
    t.g_classical[i] = a[i] * (-2.0 * u.psi_t[i] - G2[i] - 2.0 * u.Phi[i]);
    t.g_relativistic[i] = ups2 * a[i] * u.psi_t[i] * u.psi_t[i];
    t.h[i] = a[i] * a[i] - b[i];
  }
  return t;
}

Sources combine(const SourceTerms& t) {
  return {sp::dealias(t.f_classical + t.f_relativistic), sp::dealias(t.g_classical + t.g_relativistic),
          sp::dealias(t.h)};
}

SourceTriple assemble_sources(const Trajectory<ReformState>& U, const Params& p) {
  SourceTriple s;
  s.f.dt = s.g.dt = s.h.dt = U.dt;
  s.f.states.resize(U.size());
  s.g.states.resize(U.size());
  s.h.states.resize(U.size());
  parallel_for(U.size(), [&](std::size_t j) {
    auto c = combine(source_terms(U.states[j], p));
    s.f.states[j] = std::move(c.f);
    s.g.states[j] = std::move(c.g);
    s.h.states[j] = std::move(c.h);
  });
  return s;
}

// --- residuals ----------------------------------------------------------------

RealField residual_continuity(const Trajectory<HydroState>& traj, std::size_t j, const Params& p) {
  require_interior(traj, j);
  const auto& prev = traj[j - 1];
  const auto& cur = traj[j];
  const auto& next = traj[j + 1];
  for (const auto* h : {&prev, &cur, &next}) madelung::require_vacuum_free(h->n, p);
  const double ups2 = p.upsilon * p.upsilon;
  RealField r = centered(next.n, prev.n, traj.dt);
  r += sp::divergence(cur.n * cur.grad_S);
  r -= centered(next.n * next.S_t, prev.n * prev.S_t, traj.dt) * ups2;
  return r;
}

VectorField residual_momentum(const Trajectory<HydroState>& traj, std::size_t j, const Params& p) {
  require_interior(traj, j);
  const auto& prev = traj[j - 1];
  const auto& cur = traj[j];
  const auto& next = traj[j + 1];
  for (const auto* h : {&prev, &cur, &next}) madelung::require_vacuum_free(h->n, p);
  const double ups2 = p.upsilon * p.upsilon;
  const int d = cur.grad_S.dim();
  const VectorField quantum = quantum_stress_divergence(cur.n, p, StressForm::potential);
  const VectorField relativistic = relativistic_term(traj, j, p, RelativisticForm::flux);
  const VectorField gradV = sp::gradient(cur.V);

  VectorField r(cur.n.grid());
  for (int i = 0; i < d; ++i) {
    RealField ri = centered(next.n * next.grad_S[i], prev.n * prev.grad_S[i], traj.dt);
    VectorField flux(cur.n.grid());
    for (int k = 0; k < d; ++k) flux[k] = cur.n * cur.grad_S[i] * cur.grad_S[k];
    ri += sp::divergence(flux);
    ri -= quantum[i];
    ri += cur.n * gradV[i];
    ri -= centered(next.n * next.S_t * next.grad_S[i], prev.n * prev.S_t * prev.grad_S[i], traj.dt) * ups2;
    ri += relativistic[i];
    r[i] = std::move(ri);
  }
  return r;
}

VectorField quantum_stress_divergence(const RealField& n, const Params& p, StressForm form) {
  madelung::require_vacuum_free(n, p);
  const double eps2 = p.epsilon * p.epsilon;
  const int d = n.grid()->dim();
  if (form == StressForm::potential) {
    const RealField a = n.map([](double v) { return std::sqrt(v); });
    return n * sp::gradient(sp::laplacian(a) / a) * (0.5 * eps2);
  }
  const RealField L = n.map([](double v) { return std::log(v); });
  const VectorField dL = sp::gradient(L);
  VectorField out(n.grid());
  for (int i = 0; i < d; ++i) {
    VectorField row(n.grid());
    for (int k = 0; k < d; ++k) row[k] = n * sp::derivative(dL[i], k);
    out[i] = sp::divergence(row) * (0.25 * eps2);
  }
  return out;
}

VectorField relativistic_term(const Trajectory<HydroState>& traj, std::size_t j, const Params& p,
                              RelativisticForm form) {
  require_interior(traj, j);
  const auto& prev = traj[j - 1];
  const auto& cur = traj[j];
  const auto& next = traj[j + 1];
  for (const auto* h : {&prev, &cur, &next}) madelung::require_vacuum_free(h->n, p);
  const double c = p.epsilon * p.epsilon * p.upsilon * p.upsilon;
  const double dt = traj.dt;
  auto root = [](const RealField& n) { return n.map([](double v) { return std::sqrt(v); }); };
  if (form == RelativisticForm::potential) {
    const RealField a = root(cur.n);
    const RealField att = (root(next.n) - a * 2.0 + root(prev.n)) * (1.0 / (dt * dt));
    return cur.n * sp::gradient(att / a) * (0.5 * c);
  }
  VectorField q = log_rate_flux(next) - log_rate_flux(prev);
  return q * (0.25 * c / (2.0 * dt));
}

double conserved_charge(const HydroState& h, const Params& p) {
  const double ups2 = p.upsilon * p.upsilon;
  const RealField q = h.n - h.n * h.S_t * ups2;
  return q.mean() * h.n.grid()->volume();
}

}  // namespace rqlab::rqhd
