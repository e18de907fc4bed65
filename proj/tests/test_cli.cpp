#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rqlab/config.hpp"
#include "rqlab/experiment.hpp"
#include "rqlab/rqhd.hpp"

namespace fs = std::filesystem;
namespace cli = rqlab::cli;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("rqlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

// Runs the CLI; returns the exit status and leaves stdout / stderr in files.
int lab(const Sandbox& s, const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " RQLAB_CLI " " + args + " >" + (s.dir / "stdout").string() + " 2>" +
                          (s.dir / "stderr").string();
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json json_file(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("identities mode on default fields") {
  Sandbox s;
  const auto out = s.dir / "id";
  REQUIRE(lab(s, "run " RQLAB_CONFIGS "/identities.yaml -o " + out.string()) == 0);
  const auto j = json_file(out / "identities.json");
  for (const auto& c : j["checks"]) {
    CAPTURE(c.dump());
    CHECK(c["max_rel_error"].get<double>() <= 1e-7);
  }
  const double ratio = j["relativistic_halving_ratio"];
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);

  const auto m = json_file(out / "manifest.json");
  CHECK(m["config_sha256"] == cli::sha256_hex(slurp(RQLAB_CONFIGS "/identities.yaml")));
  CHECK(m["wall_time_s"].get<double>() >= 0.0);
  CHECK(m["versions"].contains("rqlab"));
  CHECK(m["versions"].contains("fftw"));
  CHECK(m["status"]["ok"] == true);
}

TEST_CASE("equivalence mode reports the same discrepancy as the library") {
  Sandbox s;
  const auto out = s.dir / "eq";
  REQUIRE(lab(s, "run " RQLAB_CONFIGS "/equiv_1d.yaml -o " + out.string()) == 0);
  const double reported = json_file(out / "equivalence.json")["distance"];

  const auto c = cli::load_config(RQLAB_CONFIGS "/equiv_1d.yaml");
  const auto g = cli::make_grid(c);
  const auto p = cli::make_params(c);
  const auto init = cli::build_initial(c, g, p);
  rqlab::rqhd::PicardOptions opt;
  opt.tol = c.run.tol;
  opt.max_iter = c.run.max_iter;
  const auto rep = rqlab::rqhd::equivalence(init.hydro, p, c.run.T, cli::resolve_dt(c, g, p), opt);
  CHECK(reported == doctest::Approx(rep.distance).epsilon(1e-12));
}

TEST_CASE("exit codes") {
  Sandbox s;
  CHECK(lab(s, "run /no/such/file.yaml") == 4);
  const auto err = nlohmann::json::parse(slurp(s.dir / "stderr"));
  CHECK(err["error"] == "IoError");
  CHECK(err["message"].get<std::string>().find("/no/such/file.yaml") != std::string::npos);

  CHECK(lab(s, "run " + s.write("bad.yaml", "mode: kg\nparams: {upsilon: -1}\n").string()) == 2);
  CHECK(nlohmann::json::parse(slurp(s.dir / "stderr"))["error"] == "ValidationError");
  CHECK(lab(s, "validate " + s.write("bad2.yaml", "mode: kg\nrun: {T: [1]}\n").string()) == 2);
  CHECK(lab(s, "frobnicate") == 2);
  CHECK(lab(s, "report " + (s.dir / "nothing").string()) == 4);

  const auto ok = s.write("ok.yaml", "mode: kg\ngrid: {points: 16}\n");
  CHECK(lab(s, "validate " + ok.string()) == 0);
  CHECK(slurp(s.dir / "stdout").find("\"valid\":true") != std::string::npos);
}

TEST_CASE("numerical failures exit with status 3 and write error.json") {
  Sandbox s;
  const std::string cases[][2] = {
      {"VacuumError",
       "mode: rqhd\ngrid: {points: 32}\ninitial: {family: sine-perturbation, amplitude: 1.5}\nrun: {T: 0.1, dt: 0.01}\n"},
      {"CompatibilityError",
       "mode: rqhd\ngrid: {points: 32}\nparams: {b0: 2.0}\ninitial: {family: sine-perturbation, amplitude: 0.01}\n"
       "run: {T: 0.1, dt: 0.01}\n"},
      {"StabilityError",
       "mode: kg\ngrid: {points: 64}\ninitial: {family: sine-perturbation, amplitude: 0.01}\nrun: {T: 0.5, dt: 0.1}\n"},
  };
  for (const auto& c : cases) {
    CAPTURE(c[0]);
    const auto cfg = s.write("case.yaml", c[1]);
    const auto out = s.dir / c[0];
    CHECK(lab(s, "run " + cfg.string() + " -o " + out.string()) == 3);
    CHECK(nlohmann::json::parse(slurp(s.dir / "stderr"))["error"] == c[0]);
    CHECK(json_file(out / "error.json")["error"] == c[0]);
    CHECK(json_file(out / "manifest.json")["status"]["ok"] == false);
  }
}

TEST_CASE("outputs are bitwise identical across thread counts") {
  Sandbox s;
  const auto rq = s.write("rq.yaml",
                          "mode: rqhd\ngrid: {dim: 2, points: 16}\ninitial: {family: sine-perturbation, amplitude: 0.02, "
                          "phase_amplitude: 0.01}\nrun: {T: 0.05, dt: 0.01, tol: 1e-10}\n");
  const auto lm = s.write("lm.yaml",
                          "mode: limits\ngrid: {points: 16}\ninitial: {family: sine-perturbation, amplitude: 0.05}\n"
                          "run: {T: 0.1}\nlimits: {kind: nonrelativistic, values: [0.4, 0.2, 0.1]}\n");
  for (const auto& [cfg, file] : {std::pair{rq, "norm_history.csv"}, {lm, "convergence.csv"}}) {
    std::vector<std::string> got;
    for (const char* n : {"1", "4"}) {
      const auto out = s.dir / (cfg.stem().string() + n);
      REQUIRE(lab(s, "run " + cfg.string() + " -o " + out.string(), std::string("RQHD_THREADS=") + n) == 0);
      got.push_back(slurp(out / file));
      CHECK(json_file(out / "manifest.json")["threads"] == std::stoi(n));
    }
    CHECK(!got[0].empty());
    CHECK(got[0] == got[1]);
  }
  CHECK(lab(s, "report " + (s.dir / "rq1").string()) == 0);
  const auto rep = nlohmann::json::parse(slurp(s.dir / "stdout"));
  CHECK(rep["manifest"]["mode"] == "rqhd");
}

}
