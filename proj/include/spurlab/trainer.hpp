#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spurlab/loss_engine.hpp"

namespace spurlab::trainer {

using engine::Classifier;
using engine::LossModel;
using engine::Vec;

enum class Variant { entropy_min, pseudo_step, pseudo_rounds, noisy_gd };
enum class GradientSource { population, empirical };

struct TrainerConfig {
  Variant variant = Variant::entropy_min;
  double eta = 0.1;
  double R = 1.0;
  int max_steps = 1000;
  double conf_threshold = 0.1;  // pseudo_rounds only
  int epochs_per_round = 1;     // pseudo_rounds only
  double noise_scale = 0.0;     // noisy_gd only
  std::uint64_t seed = 0;
  GradientSource gradient_source = GradientSource::population;
  double stop_tol = 1e-6;  // stop once |w2| falls below this
};

// Per-step state of a run. The CSV schema is fixed:
// step,norm_w1,norm_w2,loss,accuracy,g1_dot,g2_dot,sigma
struct TrajectoryRecord {
  int step = 0;
  double norm_w1 = 0.0;
  double norm_w2 = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
  double g1_dot = 0.0;  // <grad_{w1} L, w1>
  double g2_dot = 0.0;  // <grad_{w2} L, w2>
  double sigma = 0.0;
  // Norm of the w2 block of the pre-projection iterate that produced this
  // state (record 0 carries its own norm). Not serialized.
  double norm_w2_pre = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<Classifier> iterates;  // aligned with records
  bool precondition_violated = false;

  const TrajectoryRecord& back() const { return records.back(); }
  int steps() const { return static_cast<int>(records.size()) - 1; }
  void write_csv(std::ostream& os) const;
};

// One projected gradient step: R * (w - eta*grad) / |w - eta*grad|. The
// output always lies exactly on the radius-R sphere. Throws on a vanishing
// post-step vector.
Classifier gd_step(const Classifier& w, const Vec& grad, double eta, double R);

// Self-training by gradient descent on the confidence loss.
Trajectory run_entropy_min(const Classifier& w0, const TrainerConfig& cfg,
                           LossModel& model);

// Per-step pseudo-labeling: label with the current classifier, then take one
// projected gradient step on the frozen-label loss. Produces the same
// iterates as run_entropy_min.
Trajectory run_pseudo_step(const Classifier& w0, const TrainerConfig& cfg,
                           LossModel& model);

// Multi-epoch pseudo-labeling: per round, freeze labels, drop samples with
// |w'x| < conf_threshold, run epochs_per_round projected gradient steps on
// the frozen-label loss, then relabel (on a fresh batch when the model has a
// provider). max_steps counts rounds. Throws if a threshold empties a round.
Trajectory run_pseudo_rounds(const Classifier& w0, const TrainerConfig& cfg,
                             engine::EmpiricalModel& model);

// Entropy minimization with seeded Gaussian noise added to each gradient.
Trajectory run_noisy_gd(const Classifier& w0, const TrainerConfig& cfg,
                        LossModel& model);

// Dispatch on cfg.variant (pseudo_rounds requires an EmpiricalModel).
Trajectory run(const Classifier& w0, const TrainerConfig& cfg,
               LossModel& model);

// ---------------------------------------------------------------------------
// (eps, gamma)-approximate local minimum certificate for the restriction of
// the loss to classifiers with zero spurious weight.
// ---------------------------------------------------------------------------
struct LocalMinCertificate {
  bool cond1 = false;  // |w1| >= 1 - eps
  bool cond2 = false;  // |P grad| <= eps, P the projection orthogonal to w1
  bool cond3 = false;  // min tangent eigenvalue of P H P - (w1'grad) P >= -gamma
  double norm_w1 = 0.0;
  double projected_grad_norm = 0.0;
  double min_tangent_eigenvalue = 0.0;  // 0 when the tangent space is empty
  bool all() const { return cond1 && cond2 && cond3; }
};

// purified_loss / purified_grad act on w1 alone (w2 pinned to zero). The
// Hessian is taken by central finite differences of the gradient, step 1e-4.
LocalMinCertificate certify_local_min(
    const Vec& w1, const std::function<double(const Vec&)>& purified_loss,
    const std::function<Vec(const Vec&)>& purified_grad, double eps,
    double gamma);

// Convenience wrapper for the Gaussian population objective.
LocalMinCertificate certify_local_min(const Vec& w1,
                                      const dist::GaussianTargetSpec& spec,
                                      double eps, double gamma);

// Step-size heuristic: 0.05 divided by the largest gradient difference
// quotient over random classifier pairs.
double default_eta(LossModel& model, double R, std::uint64_t seed,
                   int pairs = 100);

// Least-squares slope and R^2 of log(norm_w2) against step over the records
// with lo <= norm_w2 <= hi.
struct DecayFit {
  double slope = 0.0;
  double r_squared = 0.0;
  int points = 0;
};
DecayFit fit_w2_decay(const Trajectory& traj, double lo = 1e-5,
                      double hi = 1e-1);

}  // namespace spurlab::trainer
