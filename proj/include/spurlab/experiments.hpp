#pragma once

#include <cstdint>
#include <string>

#include "spurlab/config.hpp"
#include "spurlab/distributions.hpp"
#include "spurlab/trainer.hpp"

namespace spurlab::experiments {

// Exit-code contract shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// Full-batch labeled training on the source sample: gradient descent on
// mean exp(-y w'x), projected into the unit R-ball, until the projected
// gradient norm drops below 1e-8 (at most max_steps steps).
engine::Classifier train_source_classifier(const dist::SampleBatch& source,
                                           double R = 1.0, double eta = 0.5,
                                           int max_steps = 10000);

// One toy-experiment arm: sample source data, fit the source classifier,
// self-train on target batches with the configured variant.
struct ToyRunResult {
  dist::Vec gamma;
  engine::Classifier source_classifier;
  double source_target_accuracy = 0.0;
  double bayes = 0.0;
  trainer::Trajectory trajectory;
  double final_accuracy = 0.0;
  double final_max_abs_w2 = 0.0;
};
ToyRunResult run_toy_experiment(const config::ScenarioConfig& cfg,
                                std::uint64_t seed);

// Subcommand bodies; each returns a process exit code and writes its outputs
// under cfg.out_dir. Thrown config::ConfigError maps to kExitUsage and other
// exceptions to kExitNumeric at the CLI boundary.
int cmd_simulate(const config::ScenarioConfig& cfg);
int cmd_verify(const std::string& selector, const std::string& out_dir);
int cmd_surrogate_compare(const config::ScenarioConfig& cfg);
int cmd_concentration(const config::ScenarioConfig& cfg);

}  // namespace spurlab::experiments
