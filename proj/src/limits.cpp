#include "rqlab/limits.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "rqlab/kg.hpp"
#include "rqlab/parallel.hpp"

namespace rqlab::limits {

namespace sp = spectral;

std::string to_string(LimitKind k) {
  switch (k) {
    case LimitKind::semiclassical: return "semiclassical";
    case LimitKind::nonrelativistic: return "nonrelativistic";
    case LimitKind::combined: return "combined";
  }
  return "?";
}

LimitKind parse_limit_kind(const std::string& s) {
  if (s == "semiclassical") return LimitKind::semiclassical;
  if (s == "nonrelativistic") return LimitKind::nonrelativistic;
  if (s == "combined") return LimitKind::combined;
  throw ValidationError("limit kind must be semiclassical, nonrelativistic or combined, got '" + s + "'");
}

Params switch_off(LimitKind kind, Params p) {
  if (kind != LimitKind::nonrelativistic) p.epsilon = 0.0;
  if (kind != LimitKind::semiclassical) p.upsilon = 0.0;
  return p;
}

Params at_value(LimitKind kind, Params p, double value) {
  if (kind != LimitKind::nonrelativistic) p.epsilon = value;
  if (kind != LimitKind::semiclassical) p.upsilon = value;
  return p;
}

LimitRates limit_rates(const RealField& n, const RealField& S, const madelung::Winding& m, const Params& p) {
  const double eps = p.epsilon, ups2 = p.upsilon * p.upsilon;
  if (eps * p.upsilon != 0.0)
    throw DegenerateParameterError("limit systems need epsilon = 0 or upsilon = 0; use KG or Picard otherwise");
  madelung::require_vacuum_free(n, p);
  const auto grid = n.grid();
  if (eps == 0.0 && (m[0] != 0 || m[1] != 0 || m[2] != 0))
    throw PreconditionError("a phase winding scales with epsilon and vanishes at epsilon = 0; use periodic S");

  LimitRates r;
  r.grad_S = sp::gradient(S);
  if (eps > 0.0) r.grad_S += madelung::winding_gradient(grid, m, eps);
  r.V = sp::solve_poisson_projected(n - p.doping(grid)).field;

  RealField X = sp::dot(r.grad_S, r.grad_S) + r.V * 2.0;
  if (eps > 0.0) {
    const RealField a = n.map([](double v) { return std::sqrt(v); });
    X -= sp::laplacian(a) / a * (eps * eps);
  }
  RealField root = X.map([&](double x) {
    const double q = 1.0 + ups2 * x;
    if (!(q > 0.0)) throw DomainError("1 + ups^2 X <= 0: the relativistic Hamilton-Jacobi root is complex");
    return std::sqrt(q);
  });
  r.S_t = sp::dealias(-X / (root + 1.0));

  const RealField rho_t = -sp::divergence(n * r.grad_S);
  if (ups2 == 0.0) {
    r.n_t = sp::dealias(rho_t);
    return r;
  }
  // n_t enters S_tt through V_t = Lap^{-1} n_t; solve by fixed-point iteration.
  const RealField denom = r.S_t * (-ups2) + 1.0;
  const RealField HX = root.map([](double s) { return -0.5 / s; });
  const VectorField gradSt = sp::gradient(r.S_t);
  const RealField kinetic = sp::dot(r.grad_S, gradSt) * 2.0;
  RealField nt = rho_t / denom;
  for (int it = 0; it < 100; ++it) {
    const RealField Vt = sp::solve_poisson_projected(nt).field;
    const RealField Stt = HX * (kinetic + Vt * 2.0);
    RealField next = (rho_t + n * Stt * ups2) / denom;
    const double change = (next - nt).max_abs();
    nt = std::move(next);
    if (change <= 1e-15 * std::max(1.0, nt.max_abs())) break;
  }
  r.n_t = sp::dealias(nt);
  return r;
}

namespace {

HydroState to_hydro(const RealField& n, const RealField& S, const madelung::Winding& m, const LimitRates& r,
                    double t) {
  HydroState h;
  h.n = n;
  h.n_t = r.n_t;
  h.S_periodic = S - S.mean();
  h.winding = m;
  h.grad_S = r.grad_S;
  h.S_t = r.S_t;
  h.V = r.V;
  h.time = t;
  return h;
}

}  // namespace

Trajectory<HydroState> solve_limit_system(LimitKind kind, const LimitInit& init, const Params& base, double T,
                                          double dt) {
  const Params p = switch_off(kind, base);
  const std::size_t steps = step_count(T, dt);
  Trajectory<HydroState> out;
  out.dt = steps > 0 ? dt : 0.0;
  RealField n = init.n0, S = init.S0_periodic;
  LimitRates r = limit_rates(n, S, init.winding, p);
  out.states.push_back(to_hydro(n, S, init.winding, r, 0.0));
  for (std::size_t j = 0; j < steps; ++j) {
    const LimitRates k1 = r;
    const LimitRates k2 = limit_rates(n + k1.n_t * (0.5 * dt), S + k1.S_t * (0.5 * dt), init.winding, p);
    const LimitRates k3 = limit_rates(n + k2.n_t * (0.5 * dt), S + k2.S_t * (0.5 * dt), init.winding, p);
    const LimitRates k4 = limit_rates(n + k3.n_t * dt, S + k3.S_t * dt, init.winding, p);
    n += (k1.n_t + k2.n_t * 2.0 + k3.n_t * 2.0 + k4.n_t) * (dt / 6.0);
    S += (k1.S_t + k2.S_t * 2.0 + k3.S_t * 2.0 + k4.S_t) * (dt / 6.0);
    if (!n.all_finite() || !S.all_finite())
      throw StabilityError("limit system became non-finite at step " + std::to_string(j + 1));
    r = limit_rates(n, S, init.winding, p);
    out.states.push_back(to_hydro(n, S, init.winding, r, static_cast<double>(j + 1) * dt));
  }
  return out;
}

FitResult fit_order(const std::vector<double>& params, const std::vector<double>& d) {
  if (params.size() != d.size() || d.size() < 3) throw FitError("fit needs >= 3 (param, discrepancy) pairs");
  bool all_zero = true;
  for (double v : d) all_zero = all_zero && v == 0.0;
  if (all_zero) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!(d[i] > 0.0) || !(params[i] > 0.0))
      throw FitError("log-log fit needs positive values, got discrepancy " + format_number(d[i]) + " at param " +
                     format_number(params[i]));
  const double m = static_cast<double>(d.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double x = std::log(params[i]), y = std::log(d[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = m * sxx - sx * sx;
  if (!(den > 0.0)) throw FitError("parameter values must not all coincide");
  const double slope = (m * sxy - sx * sy) / den;
  const double icpt = (sy - slope * sx) / m;
  double ss = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = std::log(d[i]) - (icpt + slope * std::log(params[i]));
    ss += e * e;
  }
  return {slope, std::sqrt(ss / m)};
}

double study_auto_dt(LimitKind kind, const spectral::SpectralGrid& grid, const Params& base,
                     const std::vector<double>& values, double T) {
  double bound = std::numeric_limits<double>::infinity();
  for (double v : values) bound = std::min(bound, kg::stability_bound(grid, at_value(kind, base, v)));
  if (T <= 0.0) return bound;
  return T / std::ceil(T / bound - 1e-12);
}

ConvergenceTable convergence_study(LimitKind kind, const LimitInit& init, const Params& base,
                                   const std::vector<double>& values, double T, double dt) {
  if (values.size() < 3) throw PreconditionError("a convergence study needs >= 3 parameter values");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw PreconditionError("study parameter values must be > 0");
    if (i > 0 && !(values[i] < values[i - 1])) throw PreconditionError("study parameter values must strictly decrease");
  }
  ConvergenceTable table;
  table.kind = kind;
  table.params = values;
  table.dt = dt;
  table.T = T;

  const auto limit = solve_limit_system(kind, init, base, T, dt);
  // Well-prepared data: the limit system's own time derivatives at t = 0.
  const auto& h0 = limit.front();

  const std::size_t k = values.size();
  table.discrepancies.assign(k, std::numeric_limits<double>::quiet_NaN());
  table.min_n.assign(k, std::numeric_limits<double>::quiet_NaN());
  table.failures.assign(k, "");
  parallel_for(k, [&](std::size_t i) {
    try {
      const Params p = at_value(kind, base, values[i]);
      const auto d = madelung::initial_data_kg_from_hydro(h0.n, h0.n_t, init.S0_periodic, init.winding, h0.S_t, p);
      const auto run = kg::kg_solve(kg::KGState{d.phi0, d.phi1, 0.0}, p, T, dt);
      double worst = 0.0, lo = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < run.trajectory.size(); ++j) {
        const auto h = madelung::kg_to_hydro(run.trajectory[j], p);
        worst = std::max(worst, madelung::hydro_distance(h, limit[j]));
        lo = std::min(lo, sp::min_value(h.n));
      }
      table.discrepancies[i] = worst;
      table.min_n[i] = lo;
    } catch (const std::exception& e) {
      table.failures[i] = e.what();
    }
  });
  std::string failed;
  for (std::size_t i = 0; i < k; ++i)
    if (!table.failures[i].empty()) failed += " [" + format_number(values[i]) + ": " + table.failures[i] + "]";
  if (!failed.empty()) {
    table.fitted_order = table.fit_residual = std::numeric_limits<double>::quiet_NaN();
    throw PartialStudyError("convergence study runs failed:" + failed, table);
  }
  const auto fit = fit_order(table.params, table.discrepancies);
  table.fitted_order = fit.order;
  table.fit_residual = fit.residual;
  return table;
}

void write_table_csv(std::ostream& os, const ConvergenceTable& t) {
  os << "param,discrepancy\n";
  char buf[128];
  for (std::size_t i = 0; i < t.params.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t.params[i], t.discrepancies[i]);
    os << buf;
  }
}

void write_summary_json(std::ostream& os, const ConvergenceTable& t) {
  nlohmann::json j = {{"kind", to_string(t.kind)},
                      {"fitted_order", t.fitted_order},
                      {"fit_residual", t.fit_residual},
                      {"params", t.params},
                      {"discrepancies", t.discrepancies},
                      {"min_n", t.min_n},
                      {"failures", t.failures},
                      {"dt", t.dt},
                      {"T", t.T}};
  os << j.dump(2) << '\n';
}

}  // namespace rqlab::limits
