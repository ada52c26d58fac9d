// Command-line front end: scenario simulation, verification suites,
// surrogate comparison and the gradient-concentration study.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spurlab/config.hpp"
#include "spurlab/experiments.hpp"

namespace {

using spurlab::config::ConfigError;
using spurlab::config::ScenarioConfig;
namespace experiments = spurlab::experiments;

ScenarioConfig load_config(const std::string& config_path,
                           const std::string& out_dir, long long seed) {
  ScenarioConfig cfg = config_path.empty()
                           ? ScenarioConfig{}
                           : ScenarioConfig::parse_file(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed)};
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spurlab: self-training dynamics laboratory for linear "
               "classifiers under spurious-feature shift"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  std::string suite = "all";

  auto* sim = app.add_subcommand("simulate",
                                 "train a source classifier and self-train on "
                                 "target data");
  sim->add_option("--config", config_path, "scenario config file");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--seed", seed, "override the seed list with one seed");

  auto* ver = app.add_subcommand("verify", "run verification suites");
  ver->add_option("--suite", suite,
                  "all|kernels|lemmas|examples|finite-sample");
  ver->add_option("--out", out_dir, "output directory");

  auto* sur = app.add_subcommand("surrogate-compare",
                                 "compare exp and entropy surrogate training");
  sur->add_option("--config", config_path, "scenario config file");
  sur->add_option("--out", out_dir, "output directory");
  sur->add_option("--seed", seed, "override the seed list with one seed");

  auto* con = app.add_subcommand("concentration",
                                 "empirical-vs-population gradient deviation "
                                 "study");
  con->add_option("--config", config_path, "scenario config file");
  con->add_option("--out", out_dir, "output directory");
  con->add_option("--seed", seed, "override the seed list with one seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : experiments::kExitUsage;
  }

  try {
    if (sim->parsed())
      return experiments::cmd_simulate(load_config(config_path, out_dir, seed));
    if (ver->parsed())
      return experiments::cmd_verify(suite, out_dir.empty() ? "out" : out_dir);
    if (sur->parsed())
      return experiments::cmd_surrogate_compare(
          load_config(config_path, out_dir, seed));
    if (con->parsed())
      return experiments::cmd_concentration(
          load_config(config_path, out_dir, seed));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return experiments::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return experiments::kExitNumeric;
  }
  return experiments::kExitUsage;
}
