#include "rqlab/experiment.hpp"

#include <fftw3.h>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rqlab/limits.hpp"
#include "rqlab/madelung.hpp"
#include "rqlab/parallel.hpp"
#include "rqlab/snapshot.hpp"

namespace rqlab::cli {

namespace fs = std::filesystem;
namespace sp = spectral;
using nlohmann::json;

namespace {

double phase(const std::array<double, 3>& k, const sp::Point& x) { return k[0] * x[0] + k[1] * x[1] + k[2] * x[2]; }

madelung::Winding winding_of(const ExperimentConfig& c) {
  madelung::Winding m{};
  for (int a = 0; a < c.grid.dim; ++a) m[a] = c.initial.wavevector.at(a);
  return m;
}

std::ofstream open_out(const fs::path& path, std::vector<std::string>& outputs, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot create output file " + path.string());
  outputs.push_back(path.filename().string());
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 digest failed");
  std::ostringstream ss;
  for (unsigned i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return ss.str();
}

InitialData build_initial(const ExperimentConfig& c, const GridPtr& grid, const Params& p) {
  const auto& in = c.initial;
  const double A = in.amplitude;
  const auto m = winding_of(c);
  const auto k = grid->lattice_vector(m);
  const auto& g = *grid;

  InitialData d;
  auto& h = d.hydro;
  h.n1 = RealField(grid);
  h.S0_periodic = RealField(grid);
  h.S1 = RealField(grid);

  if (in.family == "plane-wave") {
    d.kg = kg::plane_wave(grid, m, A, p, kg::Branch::plus);
    const double kmag = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    h.n0 = RealField::constant(grid, A * A);
    h.winding = m;
    h.S1 = RealField::constant(grid, -p.epsilon * kg::dispersion_omega(kmag, p, kg::Branch::plus));
    return d;
  }
  if (in.family == "snapshot") {
    const auto snap = snapshot::read_file(in.path);
    if (!(*snap.grid == g)) throw ValidationError("initial.path: snapshot grid does not match the configured grid");
    // Re-home the samples on the configured grid object.
    if (snap.kind == snapshot::Kind::complex) {
      const ComplexField phi0(grid, std::vector<sp::Complex>(snap.as_complex().values().begin(),
                                                             snap.as_complex().values().end()));
      const ComplexField phi1(grid);
      const auto hy = madelung::initial_data_hydro_from_kg(phi0, phi1, p);
      p.check_charge_balance(hy.n0);
      h.n0 = hy.n0;
      h.n1 = hy.n1;
      h.S0_periodic = hy.S0_periodic;
      h.S1 = hy.S1;
      h.winding = hy.winding;
      d.kg = kg::KGState{phi0, phi1, 0.0};
      return d;
    }
    const auto real = snap.as_real();
    h.n0 = RealField(grid, std::vector<double>(real.values().begin(), real.values().end()));
  } else if (in.family == "constant") {
    h.n0 = RealField::constant(grid, in.density.value_or(p.b0));
  } else if (in.family == "gaussian-bump") {
    RealField G = RealField::sample(grid, [&](const sp::Point& x) {
      // Periodic chord distance to the box centre; equals |x - c|^2 near the
      // centre and keeps the bump smooth across the boundary.
      double r2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        const double L = g.extent(a) / (2.0 * std::numbers::pi);
        r2 += 2.0 * L * L * (1.0 + std::cos(x[a] / L));
      }
      return std::exp(-r2 / (2.0 * in.width * in.width));
    });
    G += -G.mean();
    h.n0 = (G * A + 1.0) * p.nbar;
  } else if (in.family == "sine-perturbation") {
    h.n0 = RealField::sample(grid, [&](const sp::Point& x) { return p.nbar * (1.0 + A * std::sin(phase(k, x))); });
    h.S0_periodic = RealField::sample(grid, [&](const sp::Point& x) { return in.phase_amplitude * std::cos(phase(k, x)); });
  } else {
    throw ValidationError("initial.family: unknown family " + in.family);
  }
  p.check_charge_balance(h.n0);
  const auto kgd = madelung::initial_data_kg_from_hydro(h.n0, h.n1, h.S0_periodic, h.winding, h.S1, p);
  d.kg = kg::KGState{kgd.phi0, kgd.phi1, 0.0};
  return d;
}

double resolve_dt(const ExperimentConfig& c, const GridPtr& grid, const Params& p) {
  if (c.run.dt) return *c.run.dt;
  const double T = c.run.T;
  auto fit = [&](double bound) { return T > 0.0 ? T / std::ceil(T / bound - 1e-12) : bound; };
  switch (c.mode) {
    case Mode::kg:
    case Mode::equivalence: return kg::auto_dt(*grid, p, T);
    case Mode::limits: {
      const auto kind = limits::parse_limit_kind(c.limits.kind);
      return limits::study_auto_dt(kind, *grid, p, c.limits.values, T);
    }
    case Mode::rqhd: {
      double h = grid->spacing(0);
      for (int a = 1; a < grid->dim(); ++a) h = std::min(h, grid->spacing(a));
      return fit(0.5 * h);
    }
    case Mode::identities: return 1e-2;
  }
  return fit(1e-3);
}

namespace {

double rel_diff(const RealField& a, const RealField& b) {
  const double scale = std::max(a.max_abs(), b.max_abs());
  const double d = (a - b).max_abs();
  return scale > 0.0 ? d / scale : d;
}

double rel_diff(const VectorField& a, const VectorField& b) {
  const double scale = std::max(a.max_abs(), b.max_abs());
  const double d = (a - b).max_abs();
  return scale > 0.0 ? d / scale : d;
}

RealField default_density(const GridPtr& grid, const Params& p) {
  const auto k = grid->lattice_vector({1, 2, 0});
  return RealField::sample(grid, [&](const sp::Point& x) {
    if (grid->dim() == 1) return p.nbar * (1.0 + 0.1 * std::sin(k[0] * x[0]));
    return p.nbar * (1.0 + 0.3 * std::sin(k[0] * x[0]) + 0.2 * std::cos(k[1] * x[1]));
  });
}

struct RelPair {
  VectorField pot, flux;
};

RelPair relativistic_pair(const RealField& nd, const Params& p, double h) {
  const auto grid = nd.grid();
  const double t0 = 0.5;
  const RealField dev = nd - p.nbar;
  Trajectory<madelung::HydroState> traj;
  traj.dt = h;
  for (int j = -1; j <= 1; ++j) {
    const double t = t0 + j * h;
    traj.states.push_back(madelung::make_hydro(dev * std::cos(t) + p.nbar, dev * (-std::sin(t)), RealField(grid), {},
                                               RealField(grid), p, t));
  }
  return {rqhd::relativistic_term(traj, 1, p, rqhd::RelativisticForm::potential),
          rqhd::relativistic_term(traj, 1, p, rqhd::RelativisticForm::flux)};
}

}  // namespace

IdentityReport run_identities(const ExperimentConfig& c, const GridPtr& grid, const Params& p, double dt) {
  IdentityReport rep;
  const InitialData init = build_initial(c, grid, p);
  const RealField nd = default_density(grid, p);

  auto stress = [&](const RealField& n) {
    return rel_diff(rqhd::quantum_stress_divergence(n, p, rqhd::StressForm::potential),
                    rqhd::quantum_stress_divergence(n, p, rqhd::StressForm::tensor));
  };
  rep.checks.push_back({"quantum_stress_default_density", stress(nd)});
  rep.checks.push_back({"quantum_stress_initial_density", stress(init.hydro.n0)});

  // Both forms carry O(dt^2) stencil error; one Richardson step removes it.
  const RelPair r1 = relativistic_pair(nd, p, dt), r2 = relativistic_pair(nd, p, 0.5 * dt);
  const double e1 = rel_diff(r1.pot, r1.flux), e2 = rel_diff(r2.pot, r2.flux);
  rep.relativistic_dt = dt;
  rep.relativistic_raw_error = e1;
  rep.relativistic_halving_ratio = e2 > 0.0 ? e1 / e2 : 0.0;
  rep.checks.push_back({"relativistic_term_two_forms",
                        rel_diff(r2.pot * (4.0 / 3.0) - r1.pot * (1.0 / 3.0),
                                 r2.flux * (4.0 / 3.0) - r1.flux * (1.0 / 3.0))});

  const auto& h0 = init.hydro;
  const auto hs = madelung::make_hydro(h0.n0, h0.n1, h0.S0_periodic, h0.winding, h0.S1, p);
  const auto back = rqhd::unreformulate(rqhd::reformulate(hs, p), p);
  rep.checks.push_back({"reformulation_round_trip",
                        std::max({rel_diff(hs.n, back.n), rel_diff(hs.n_t, back.n_t), rel_diff(hs.grad_S, back.grad_S),
                                  rel_diff(hs.S_t, back.S_t)})});
  const auto mad = madelung::kg_to_hydro(madelung::hydro_to_kg(hs, p), p);
  rep.checks.push_back({"madelung_round_trip",
                        std::max({rel_diff(hs.n, mad.n), rel_diff(hs.n_t, mad.n_t), rel_diff(hs.grad_S, mad.grad_S),
                                  rel_diff(hs.S_t, mad.S_t)})});
  for (const auto& ch : rep.checks) rep.max_rel_error = std::max(rep.max_rel_error, ch.max_rel_error);
  return rep;
}

namespace {

json report_json(const rqhd::IterationReport& r) {
  return {{"iterations", r.iterations},
          {"successive_diffs", r.successive_diffs},
          {"converged", r.converged},
          {"contraction_ratio_estimate", r.contraction_ratio_estimate}};
}

void write_reform_trajectory(std::ostream& os, const Trajectory<rqhd::ReformState>& U) {
  snapshot::write_header(os, {U.steps(), U.dt});
  for (const auto& s : U.states)
    for (const auto* f : {&s.psi, &s.Psi, &s.Phi, &s.psi_t, &s.Psi_t}) snapshot::write(os, *f);
}

limits::LimitInit limit_init(const InitialData& d) { return {d.hydro.n0, d.hydro.S0_periodic, d.hydro.winding}; }

rqhd::PicardOptions picard_options(const ExperimentConfig& c) {
  rqhd::PicardOptions o;
  o.tol = c.run.tol;
  o.max_iter = c.run.max_iter;
  o.N = c.run.N;
  o.C = c.run.C;
  return o;
}

RunResult run_mode(const ExperimentConfig& c, const fs::path& dir) {
  RunResult res;
  auto& out = res.outputs;
  const GridPtr grid = make_grid(c);
  const Params p = make_params(c);
  const double T = c.run.T;

  switch (c.mode) {
    case Mode::kg: {
      const auto init = build_initial(c, grid, p);
      const double dt = resolve_dt(c, grid, p);
      const auto run = kg::kg_solve(init.kg, p, T, dt);
      {
        auto os = open_out(dir / "trajectory.bin", out, true);
        snapshot::write_header(os, {run.trajectory.steps(), run.trajectory.dt});
        for (const auto& s : run.trajectory.states) {
          snapshot::write(os, s.phi);
          snapshot::write(os, s.phi_t);
        }
      }
      auto os = open_out(dir / "charge.csv", out);
      os << "t,Q\n";
      double drift = 0.0;
      for (std::size_t j = 0; j < run.charge.size(); ++j) {
        os << fmt(run.trajectory.time(j)) << ',' << fmt(run.charge[j]) << '\n';
        drift = std::max(drift, std::abs(run.charge[j] - run.charge[0]) / std::abs(run.charge[0]));
      }
      res.summary = {{"dt", dt}, {"steps", run.trajectory.steps()}, {"charge_initial", run.charge.front()},
                     {"charge_max_rel_drift", drift}};
      break;
    }
    case Mode::rqhd: {
      const auto init = build_initial(c, grid, p);
      const double dt = resolve_dt(c, grid, p);
      const auto& h = init.hydro;
      const auto pinit = rqhd::picard_init_from_hydro(h.n0, h.n1, h.S0_periodic, h.winding, h.S1, p);
      rqhd::PicardResult pr;
      try {
        pr = rqhd::picard_solve(pinit, p, T, dt, picard_options(c));
      } catch (const rqhd::NoConvergenceError& e) {
        auto os = open_out(dir / "report.jsonl", out);
        os << json{{"record", "iteration_report"}, {"iterations", e.report().iterations},
                   {"successive_diffs", e.report().successive_diffs}, {"converged", false},
                   {"contraction_ratio_estimate", e.report().contraction_ratio_estimate}}
                  .dump()
           << '\n';
        throw;
      }
      {
        auto os = open_out(dir / "trajectory.bin", out, true);
        write_reform_trajectory(os, pr.trajectory);
      }
      {
        auto os = open_out(dir / "report.jsonl", out);
        rqhd::write_report_jsonl(os, pr.report, pr.estimates);
      }
      auto os = open_out(dir / "norm_history.csv", out);
      rqhd::write_norm_history_csv(os, pr.estimates.norm_history);
      res.summary = {{"dt", dt}, {"report", report_json(pr.report)}, {"Tstar", pr.estimates.Tstar},
                     {"I0", pr.estimates.I0}, {"a0", pr.estimates.a0}};
      break;
    }
    case Mode::equivalence: {
      const auto init = build_initial(c, grid, p);
      const double dt = resolve_dt(c, grid, p);
      const auto rep = rqhd::equivalence(init.hydro, p, T, dt, picard_options(c));
      json j = {{"T", rep.T},
                {"dt", rep.dt},
                {"distance", rep.distance},
                {"distances", rep.distances},
                {"picard", report_json(rep.picard)},
                {"kg_charge_max_rel_drift", rep.kg_charge_drift},
                {"continuity_residual", rep.continuity_residual},
                {"momentum_residual", rep.momentum_residual}};
      auto os = open_out(dir / "equivalence.json", out);
      os << j.dump(2) << '\n';
      res.summary = {{"distance", rep.distance}, {"dt", dt}, {"picard_iterations", rep.picard.iterations}};
      break;
    }
    case Mode::limits: {
      const auto kind = limits::parse_limit_kind(c.limits.kind);
      const auto init = build_initial(c, grid, limits::at_value(kind, p, c.limits.values.front()));
      const double dt = resolve_dt(c, grid, p);
      auto write = [&](const limits::ConvergenceTable& t) {
        {
          auto os = open_out(dir / "convergence.csv", out);
          limits::write_table_csv(os, t);
        }
        auto os = open_out(dir / "summary.json", out);
        limits::write_summary_json(os, t);
      };
      try {
        const auto t = limits::convergence_study(kind, limit_init(init), p, c.limits.values, T, dt);
        write(t);
        res.summary = {{"kind", c.limits.kind}, {"fitted_order", t.fitted_order}, {"discrepancies", t.discrepancies}};
      } catch (const limits::PartialStudyError& e) {
        write(e.table());
        throw;
      }
      break;
    }
    case Mode::identities: {
      const double dt = resolve_dt(c, grid, p);
      const auto rep = run_identities(c, grid, p, dt);
      json checks = json::array();
      for (const auto& ch : rep.checks) checks.push_back({{"name", ch.name}, {"max_rel_error", ch.max_rel_error}});
      json j = {{"checks", checks},
                {"relativistic_dt", rep.relativistic_dt},
                {"relativistic_raw_error", rep.relativistic_raw_error},
                {"relativistic_halving_ratio", rep.relativistic_halving_ratio},
                {"max_rel_error", rep.max_rel_error}};
      auto os = open_out(dir / "identities.json", out);
      os << j.dump(2) << '\n';
      res.summary = {{"max_rel_error", rep.max_rel_error},
                     {"relativistic_halving_ratio", rep.relativistic_halving_ratio}};
      break;
    }
  }
  return res;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& c, const std::string& text, double wall,
                    const std::vector<std::string>& outputs, const json& status) {
  json m = {{"config_sha256", sha256_hex(text)},
            {"mode", to_string(c.mode)},
            {"versions",
             {{"rqlab", RQLAB_VERSION}, {"fftw", std::string(fftw_version)}, {"compiler", __VERSION__}, {"cxx", __cplusplus}}},
            {"threads", worker_count()},
            {"wall_time_s", wall},
            {"outputs", outputs},
            {"status", status}};
  std::ofstream os(dir / "manifest.json");
  if (!os) throw IoError("cannot write manifest in " + dir.string());
  os << m.dump(2) << '\n';
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->error_class()) {
      case ErrorClass::validation: return 2;
      case ErrorClass::numerical: return 3;
      case ErrorClass::io: return 4;
    }
  }
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 4;
  return 1;
}

json error_json(const std::exception& e) {
  json j;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["error"] = err->kind();
    j["class"] = err->error_class() == ErrorClass::validation ? "validation"
                 : err->error_class() == ErrorClass::io       ? "io"
                                                               : "numerical";
  } else {
    j["error"] = "InternalError";
    j["class"] = "internal";
  }
  j["message"] = e.what();
  j["exit_code"] = exit_code_for(e);
  if (const auto* nc = dynamic_cast<const rqhd::NoConvergenceError*>(&e))
    j["report"] = report_json(nc->report());
  return j;
}

RunResult run_experiment(const ExperimentConfig& c, const fs::path& outdir, const std::string& config_text) {
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create output directory " + outdir.string() + ": " + ec.message());
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  try {
    RunResult r = run_mode(c, outdir);
    r.outputs.push_back("manifest.json");
    write_manifest(outdir, c, config_text, elapsed(), r.outputs, {{"ok", true}});
    return r;
  } catch (const std::exception& e) {
    const json err = error_json(e);
    std::ofstream os(outdir / "error.json");
    if (os) os << err.dump(2) << '\n';
    try {
      write_manifest(outdir, c, config_text, elapsed(), {"error.json"}, {{"ok", false}, {"error", err["error"]}});
    } catch (const std::exception&) {
    }
    throw;
  }
}

json report_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("run directory " + dir.string() + " does not exist");
  auto load = [&](const char* name) -> json {
    std::ifstream in(dir / name);
    if (!in) return nullptr;
    try {
      return json::parse(in);
    } catch (const json::exception& e) {
      throw IoError(std::string("cannot parse ") + (dir / name).string() + ": " + e.what());
    }
  };
  json out;
  out["manifest"] = load("manifest.json");
  if (out["manifest"].is_null()) throw IoError("no manifest.json in " + dir.string());
  for (const char* name : {"equivalence.json", "summary.json", "identities.json", "error.json"}) {
    json j = load(name);
    if (j.is_null()) continue;
    if (std::string(name) == "equivalence.json") j.erase("distances");
    out[fs::path(name).stem().string()] = j;
  }
  std::ifstream rep(dir / "report.jsonl");
  std::string line;
  json lines = json::array();
  while (std::getline(rep, line))
    if (!line.empty()) lines.push_back(json::parse(line));
  if (!lines.empty()) out["report"] = lines;
  std::ifstream charge(dir / "charge.csv");
  std::string last, cur;
  while (std::getline(charge, cur))
    if (!cur.empty()) last = cur;
  if (!last.empty() && last.rfind("t,", 0) != 0) out["charge_last"] = last;
  return out;
}

}  // namespace rqlab::cli
