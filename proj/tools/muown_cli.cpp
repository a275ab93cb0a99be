// muown run <preset> [--config <file>] [--set key=value ...] --out <dir>
//
// Exit codes: 0 all assertions pass, 1 assertion failure or runtime error,
// 2 configuration error.

#include "muown/error.hpp"
#include "muown/harness/config.hpp"
#include "muown/harness/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int run(const std::string &preset, const std::string &config_path,
        const std::vector<std::string> &sets, const std::string &out) {
  using namespace muown;
  ExperimentConfig cfg;
  try {
    nlohmann::json j = config_path.empty() ? nlohmann::json::object() : read_config_file(config_path);
    j["preset"] = preset;
    for (const auto &s : sets) {
      apply_override(j, s);
    }
    cfg = config_from_json(j);
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const Outcome o = run_experiment(cfg, out);
    for (const auto &a : o.assertions) {
      std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << "\n";
    }
    std::cout << (o.pass() ? "verdict: PASS" : "verdict: FAIL") << " (" << out << ")\n";
    return o.pass() ? 0 : 1;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Weight-normalized spectral optimizer experiments"};
  app.require_subcommand(1);

  std::string preset;
  std::string config_path;
  std::vector<std::string> sets;
  std::string out;
  auto *cmd = app.add_subcommand("run", "Run an experiment preset");
  cmd->add_option("preset", preset, "train | drift | rate-check | noise-compare | lr-sweep")
      ->required();
  cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", sets, "Override a config field, e.g. --set optimizer.lr=0.01");
  cmd->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }
  return run(preset, config_path, sets, out);
}
