#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spurlab/trainer.hpp"

namespace spurlab::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Declarative scenario description. File format: `key = value` lines grouped
// under [distribution] / [trainer] / [experiment] sections; '#' comments.
// Unknown sections or keys are rejected.
struct ScenarioConfig {
  // [distribution]
  std::string kind = "toy_gaussian";  // toy_gaussian | gaussian
  double gamma_radius = 1.9815647609212321;  // toy: source accuracy 0.959
  double corr_prob = 0.8;
  int d1 = 2;
  int d2 = 2;
  double sigma1 = 1.0;
  double gamma_scalar = 2.5;     // gaussian kind: gamma = (gamma_scalar, 0...)
  double sigma2_scale = 1.0;     // gaussian kind: Sigma2 = scale * I

  // [trainer]
  trainer::TrainerConfig trainer;
  bool eta_auto = false;  // eta = 0.05 / smoothness estimate when set

  // [experiment]
  int n_samples = 10000;
  int n_test = 10000;
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir = "out";

  // [concentration] (cmd_concentration only)
  std::vector<int> n_list = {1000, 10000, 100000, 1000000};
  int trials = 20;
  int w_grid_size = 8;

  static ScenarioConfig parse_file(const std::string& path);
  static ScenarioConfig parse_text(const std::string& text);
};

}  // namespace spurlab::config
