#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "rqlab/parallel.hpp"
#include "rqlab/rqhd.hpp"

namespace rqlab::rqhd {

namespace sp = spectral;

double initial_norm_I0(const PicardInit& init, const Params& p) {
  const RealField a0 = init.Psi0 + std::sqrt(p.nbar);
  return sp::l2_norm(a0 * a0 - p.doping(a0.grid())) + sp::sobolev_norm(init.psi1, 3) +
         sp::sobolev_norm(init.Psi1, 3) + sp::sobolev_norm(init.psi0, 4) + sp::sobolev_norm(init.Psi0, 4);
}

WellposednessEstimates monitor_estimates(const Trajectory<ReformState>& U, const PicardInit& init, const Params& p,
                                         double N, double C) {
  WellposednessEstimates e;
  e.N = N;
  e.C = C;
  e.delta = p.admissible_deviation();

  const RealField a0 = init.Psi0 + std::sqrt(p.nbar);
  const double lo = sp::min_value(a0), hi = sp::max_value(a0);
  if (!(lo > 0.0)) throw VacuumError("initial amplitude Psi0 + sqrt(nbar) is not positive");
  e.a0 = std::pow((1.0 + hi) / lo, 6);
  e.I0 = initial_norm_I0(init, p);
  e.M0 = e.M1 = 4.0 * N * e.I0;

  const double inf = std::numeric_limits<double>::infinity();
  double t3 = inf, t4 = inf;
  if (e.I0 > 0.0) {
    t3 = e.I0 / (N * C * e.a0 * e.M1 * (e.M0 + e.M1));
    t4 = e.I0 / (C * N * std::pow(e.M0 + e.M1 + 2.0 * e.I0 * e.I0 * e.M1, 3));
  }
  e.Tstar = std::min({1.0, U.horizon(), t3, t4});

  const SourceTriple S = assemble_sources(U, p);
  const double ups2 = p.upsilon * p.upsilon;
  const double eps2 = p.epsilon * p.epsilon;
  const std::size_t n = U.size();
  e.norm_history.resize(n);
  std::vector<double> lhs(n), gnorm(n);
  const double vol = init.psi0.grid()->volume();
  parallel_for(n, [&](std::size_t j) {
    const auto& u = U[j];
    const RealField psitt = (sp::laplacian(u.psi) + S.f[j]) * (1.0 / ups2);
    const RealField Psitt = (sp::laplacian(u.Psi) + S.g[j] * (1.0 / eps2)) * (1.0 / ups2);
    const RealField a = u.Psi + std::sqrt(p.nbar);
    const RealField nn = a * a;
    const double Q = (nn - nn * u.psi_t * ups2).mean() * vol;
    e.norm_history[j] = {U.time(j),
                         sp::sobolev_norm(u.psi, 4),
                         sp::sobolev_norm(u.psi_t, 3),
                         sp::sobolev_norm(psitt, 2),
                         sp::sobolev_norm(u.Psi, 4),
                         sp::sobolev_norm(u.Psi_t, 3),
                         sp::sobolev_norm(Psitt, 2),
                         sp::sobolev_norm(u.Phi, 4),
                         sp::min_value(nn),
                         Q};
    lhs[j] = sp::l2_norm(u.Psi_t) + sp::sobolev_norm(u.Psi, 1);
    gnorm[j] = sp::l2_norm(S.g[j]) / (eps2 * ups2);
  });

  // Energy estimate for Psi'' - ups^-2 Lap Psi = G, integral by trapezoid.
  const double base = sp::l2_norm(init.Psi1) + sp::sobolev_norm(init.Psi0, 1);
  double integral = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) integral += 0.5 * U.dt * (gnorm[j - 1] + gnorm[j]);
    const double rhs = C * (base + integral);
    if (rhs > 0.0) e.energy_ratio_max = std::max(e.energy_ratio_max, lhs[j] / rhs);
  }
  return e;
}

void write_report_jsonl(std::ostream& os, const IterationReport& r, const WellposednessEstimates& e) {
  nlohmann::json rep = {{"record", "iteration_report"},
                        {"iterations", r.iterations},
                        {"successive_diffs", r.successive_diffs},
                        {"converged", r.converged},
                        {"contraction_ratio_estimate", r.contraction_ratio_estimate}};
  nlohmann::json est = {{"record", "wellposedness_estimates"},
                        {"a0", e.a0},
                        {"I0", e.I0},
                        {"M0", e.M0},
                        {"M1", e.M1},
                        {"Tstar", e.Tstar},
                        {"delta", e.delta},
                        {"N", e.N},
                        {"C", e.C},
                        {"energy_ratio_max", e.energy_ratio_max}};
  os << rep.dump() << '\n' << est.dump() << '\n';
}

void write_norm_history_csv(std::ostream& os, const std::vector<NormRow>& rows) {
  os << "t,psi_H4,psit_H3,psitt_H2,Psi_H4,Psit_H3,Psitt_H2,Phi_H4,min_n,Q\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.psi_H4,
                  r.psit_H3, r.psitt_H2, r.Psi_H4, r.Psit_H3, r.Psitt_H2, r.Phi_H4, r.min_n, r.Q);
    os << buf;
  }
}

}  // namespace rqlab::rqhd
