#include <algorithm>
#include <cmath>
#include <string>

#include "rqlab/kg.hpp"
#include "rqlab/parallel.hpp"
#include "rqlab/rqhd.hpp"

namespace rqlab::rqhd {

namespace sp = spectral;
using sp::Complex;

Trajectory<WaveSample> linear_wave_solve(const RealField& u0, const RealField& u1, const Trajectory<RealField>& F,
                                         double speed) {
  if (F.size() == 0) throw PreconditionError("wave source needs at least one time node");
  sp::require_same_grid(u0.grid(), u1.grid());
  for (const auto& f : F.states) sp::require_same_grid(u0.grid(), f.grid());
  const auto grid = u0.grid();
  const std::size_t modes = grid->size();
  const double dt = F.dt;

  // Per-mode propagator entries; s = sin(c dt)/c tends to dt as c -> 0.
  std::vector<double> cs(modes), sn(modes), s_over_c(modes), c_sin(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    const double c = speed * std::sqrt(grid->k_squared(i));
    const double th = c * dt;
    cs[i] = std::cos(th);
    sn[i] = std::sin(th);
    s_over_c[i] = c > 0.0 ? sn[i] / c : dt;
    c_sin[i] = c * sn[i];
  }

  auto U = sp::forward(u0);
  auto V = sp::forward(u1);
  auto Fcur = sp::forward(F.states[0]);
  Trajectory<WaveSample> out;
  out.dt = dt;
  out.states.reserve(F.size());
  out.states.push_back({u0, u1});
  for (std::size_t j = 0; j + 1 < F.size(); ++j) {
    const auto Fnext = sp::forward(F.states[j + 1]);
    for (std::size_t i = 0; i < modes; ++i) {
      const Complex u = U[i], v = V[i];
      U[i] = cs[i] * u + s_over_c[i] * v + 0.5 * dt * s_over_c[i] * Fcur[i];
      V[i] = -c_sin[i] * u + cs[i] * v + 0.5 * dt * (cs[i] * Fcur[i] + Fnext[i]);
    }
    out.states.push_back({sp::inverse_real(grid, U), sp::inverse_real(grid, V)});
    Fcur = Fnext;
  }
  return out;
}

PicardInit picard_init_from_hydro(const RealField& n0, const RealField& n1, const RealField& S0_periodic,
                                  const Winding& m, const RealField& S1, const Params& p) {
  madelung::require_vacuum_free(n0, p);
  const RealField root = n0.map([](double v) { return std::sqrt(v); });
  return {S0_periodic, S1, root - std::sqrt(p.nbar), n1 / (root * 2.0), m};
}

Trajectory<ReformState> initial_iterate(const PicardInit& init, const Params& p, double T, double dt) {
  const std::size_t steps = step_count(T, dt);
  const auto grid = init.psi0.grid();
  RealField a = init.Psi0 + std::sqrt(p.nbar);
  const RealField Phi0 = sp::solve_poisson_projected(sp::dealias(a * a - p.doping(grid))).field;
  Trajectory<ReformState> U;
  U.dt = steps > 0 ? dt : 0.0;
  for (std::size_t j = 0; j <= steps; ++j)
    U.states.push_back({init.psi0, init.Psi0, Phi0, init.psi1, init.Psi1, init.winding, static_cast<double>(j) * dt});
  return U;
}

namespace {

void require_nondegenerate(const Params& p) {
  if (!(p.epsilon > 0.0) || !(p.upsilon > 0.0))
    throw DegenerateParameterError(
        "the Picard wave operators need epsilon > 0 and upsilon > 0; limit systems use solve_limit_system");
}

}  // namespace

Trajectory<ReformState> picard_iterate(const Trajectory<ReformState>& Up, const PicardInit& init, const Params& p) {
  require_nondegenerate(p);
  const SourceTriple S = assemble_sources(Up, p);
  const double ups2 = p.upsilon * p.upsilon;
  const double eps2 = p.epsilon * p.epsilon;

  Trajectory<RealField> Fpsi{S.f.dt, {}}, FPsi{S.g.dt, {}};
  for (std::size_t j = 0; j < Up.size(); ++j) {
    Fpsi.states.push_back(S.f[j] * (1.0 / ups2));
    FPsi.states.push_back(S.g[j] * (1.0 / (eps2 * ups2)));
  }
  Trajectory<WaveSample> wpsi, wPsi;
  parallel_for(2, [&](std::size_t which) {
    if (which == 0)
      wpsi = linear_wave_solve(init.psi0, init.psi1, Fpsi, 1.0 / p.upsilon);
    else
      wPsi = linear_wave_solve(init.Psi0, init.Psi1, FPsi, 1.0 / p.upsilon);
  });

  Trajectory<ReformState> next;
  next.dt = Up.dt;
  next.states.resize(Up.size());
  parallel_for(Up.size(), [&](std::size_t j) {
    auto& s = next.states[j];
    s.psi = std::move(wpsi.states[j].u);
    s.psi_t = std::move(wpsi.states[j].u_t);
    s.Psi = std::move(wPsi.states[j].u);
    s.Psi_t = std::move(wPsi.states[j].u_t);
    s.Phi = sp::solve_poisson_projected(S.h[j]).field;
    s.winding = init.winding;
    s.time = Up.states[j].time;
  });
  return next;
}

double successive_difference(const Trajectory<ReformState>& a, const Trajectory<ReformState>& b) {
  if (a.size() != b.size()) throw PreconditionError("iterates live on different time grids");
  std::vector<double> d(a.size());
  parallel_for(a.size(), [&](std::size_t j) {
    const double x = sp::sobolev_norm(a[j].psi - b[j].psi, 1);
    const double y = sp::sobolev_norm(a[j].Psi - b[j].Psi, 1);
    d[j] = std::sqrt(x * x + y * y);
  });
  double worst = 0.0;
  for (double v : d) {
    if (!std::isfinite(v)) return v;
    worst = std::max(worst, v);
  }
  return worst;
}

PicardResult picard_solve(const PicardInit& init, const Params& p, double T, double dt, const PicardOptions& opt) {
  require_nondegenerate(p);
  const auto grid = init.psi0.grid();
  const RealField a0 = init.Psi0 + std::sqrt(p.nbar);
  const RealField n0 = a0 * a0;
  madelung::require_vacuum_free(n0, p);
  const double deviation = (n0 - p.nbar).max_abs();
  if (!(deviation < p.admissible_deviation()))
    throw PreconditionError("initial density violates |n0 - nbar| < delta: sup|n0 - nbar| = " +
                            format_number(deviation) + ", delta = " + format_number(p.admissible_deviation()));
  p.check_charge_balance(n0);

  const std::size_t steps = step_count(T, dt);
  // Two iterates of five fields, three sources and two wave histories per node.
  const double bytes = 2.0 * 10.0 * static_cast<double>(steps + 1) * static_cast<double>(grid->size()) * 8.0;
  if (bytes > opt.memory_budget_bytes)
    throw PreconditionError("Picard trajectory storage needs ~" + format_number(bytes / 1e9) +
                            " GB, above the memory budget of " + format_number(opt.memory_budget_bytes / 1e9) + " GB");
  if (opt.max_iter < 1) throw PreconditionError("max_iter must be >= 1");

  PicardResult res;
  Trajectory<ReformState> U = initial_iterate(init, p, T, dt);
  auto& rep = res.report;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Trajectory<ReformState> next = picard_iterate(U, init, p);
    const double d = successive_difference(next, U);
    U = std::move(next);
    rep.iterations = it;
    rep.successive_diffs.push_back(d);
    const std::size_t k = rep.successive_diffs.size();
    if (k >= 2 && rep.successive_diffs[k - 2] > 0.0)
      rep.contraction_ratio_estimate = std::max(rep.contraction_ratio_estimate, d / rep.successive_diffs[k - 2]);
    if (!std::isfinite(d))
      throw NoConvergenceError("Picard iterates became non-finite at iteration " + std::to_string(it), rep);
    if (d <= opt.tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged)
    throw NoConvergenceError("Picard iteration did not reach tol = " + format_number(opt.tol) + " in " +
                                 std::to_string(opt.max_iter) + " iterations (last difference " +
                                 format_number(rep.successive_diffs.back()) + ")",
                             rep);
  res.estimates = monitor_estimates(U, init, p, opt.N, opt.C);
  res.trajectory = std::move(U);
  return res;
}

EquivalenceReport equivalence(const HydroInitialSpec& data, const Params& p, double T, double dt,
                              const PicardOptions& opt) {
  EquivalenceReport rep;
  rep.T = T;
  rep.dt = dt;

  const auto kgdata = madelung::initial_data_kg_from_hydro(data.n0, data.n1, data.S0_periodic, data.winding, data.S1, p);
  const auto run = kg::kg_solve(kg::KGState{kgdata.phi0, kgdata.phi1, 0.0}, p, T, dt);
  for (double q : run.charge)
    rep.kg_charge_drift = std::max(rep.kg_charge_drift, std::abs(q - run.charge.front()) / std::abs(run.charge.front()));

  const auto init = picard_init_from_hydro(data.n0, data.n1, data.S0_periodic, data.winding, data.S1, p);
  const auto pic = picard_solve(init, p, T, dt, opt);
  rep.picard = pic.report;
  const auto hydro = unreformulate(pic.trajectory, p);

  const std::size_t n = hydro.size();
  rep.distances.assign(n, 0.0);
  std::vector<double> cont(n, 0.0), mom(n, 0.0);
  parallel_for(n, [&](std::size_t j) {
    const auto kh = madelung::kg_to_hydro(run.trajectory[j], p);
    rep.distances[j] = madelung::hydro_distance(kh, hydro[j]);
    if (j >= 1 && j + 1 < n) {
      cont[j] = sp::l2_norm(residual_continuity(hydro, j, p));
      mom[j] = sp::l2_norm(residual_momentum(hydro, j, p));
    }
  });
  for (std::size_t j = 0; j < n; ++j) {
    rep.distance = std::max(rep.distance, rep.distances[j]);
    rep.continuity_residual = std::max(rep.continuity_residual, cont[j]);
    rep.momentum_residual = std::max(rep.momentum_residual, mom[j]);
  }
  return rep;
}

}  // namespace rqlab::rqhd
