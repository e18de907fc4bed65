// rqhd-lab: config-driven front end.
//
//   rqhd-lab run <config> [--output DIR]
//   rqhd-lab validate <config>
//   rqhd-lab report <dir>
//
// Exit status: 0 ok, 2 validation, 3 numerical failure, 4 I/O.
// Failures print one JSON object on stderr (and error.json in the run directory).

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "rqlab/experiment.hpp"

namespace fs = std::filesystem;
using namespace rqlab;

namespace {

int fail(const std::exception& e) {
  std::cerr << cli::error_json(e).dump() << std::endl;
  return cli::exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Klein-Gordon / RQHD simulation laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RQLAB_VERSION);

  std::string config_path, output_dir, report_dir;
  auto* run = app.add_subcommand("run", "run an experiment");
  run->add_option("config", config_path, "YAML configuration")->required();
  run->add_option("-o,--output", output_dir, "output directory (overrides run.output)");

  auto* validate = app.add_subcommand("validate", "parse and validate a configuration");
  validate->add_option("config", config_path, "YAML configuration")->required();

  auto* report = app.add_subcommand("report", "summarize a finished run directory");
  report->add_option("dir", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const auto cfg = cli::load_config(config_path);
      std::cout << nlohmann::json{{"valid", true}, {"mode", cli::to_string(cfg.mode)}}.dump() << '\n';
      std::cout << cli::serialize_config(cfg);
      return 0;
    }
    if (*report) {
      std::cout << cli::report_directory(report_dir).dump(2) << '\n';
      return 0;
    }
    const std::string text = cli::read_config_text(config_path);
    const auto cfg = cli::parse_config(text);
    const fs::path out = output_dir.empty() ? fs::path(cfg.run.output) : fs::path(output_dir);
    const auto res = cli::run_experiment(cfg, out, text);
    std::cout << nlohmann::json{{"ok", true}, {"output", out.string()}, {"summary", res.summary}}.dump() << '\n';
    return 0;
  } catch (const std::exception& e) {
    return fail(e);
  }
}
