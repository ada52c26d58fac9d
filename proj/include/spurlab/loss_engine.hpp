#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "spurlab/distributions.hpp"

namespace spurlab::engine {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Classifier with split weights and projection radius
// ---------------------------------------------------------------------------
struct Classifier {
  Vec w1;
  Vec w2;
  double R = 1.0;

  Classifier() = default;
  Classifier(Vec w1_in, Vec w2_in, double R_in);

  int d1() const { return static_cast<int>(w1.size()); }
  int d2() const { return static_cast<int>(w2.size()); }
  double norm() const;
  Vec full() const;  // concatenated (w1, w2)

  static Classifier from_full(const Vec& w, int d1, double R);
};

// sigma = sqrt(w2' Sigma2 w2); sigma_tilde additionally folds in the signal
// variance (Gaussian case).
struct SigmaDecomposition {
  double sigma = 0.0;
  double sigma_tilde = 0.0;
};
SigmaDecomposition sigma_decomposition(const Classifier& w,
                                       const dist::GaussianTargetSpec& spec);
double spurious_sigma(const Classifier& w, const Mat& Sigma2);

// ---------------------------------------------------------------------------
// Population quantities, Gaussian signal. The d1-dimensional Gaussian signal
// reduces exactly to one dimension through mu = w1'gamma and
// sigma_tilde^2 = |w1|^2 sigma1^2 + w2' Sigma2 w2, so these are closed forms.
// ---------------------------------------------------------------------------

double population_loss_gaussian(const Classifier& w,
                                const dist::GaussianTargetSpec& spec);

// Full analytic gradient (size d1 + d2), assembled by the chain rule from
// dg/dmu and q_sigma. Note d sigma/d w2 = Sigma2 w2 / sigma (the derivative
// of sigma itself, not of sigma^2). At w = 0 the sigma-direction terms are
// taken as 0 (subgradient limit).
Vec population_grad_gaussian(const Classifier& w,
                             const dist::GaussianTargetSpec& spec);

// P(sign(w'x) = y) = Phi(w1'gamma / sigma_tilde), closed form.
double population_accuracy_gaussian(const Classifier& w,
                                    const dist::GaussianTargetSpec& spec);

// ---------------------------------------------------------------------------
// Population quantities, general 1-d mixture signal (adaptive quadrature)
// ---------------------------------------------------------------------------

double population_loss_general(const Classifier& w,
                               const dist::MixtureSignalSpec& signal,
                               const Mat& Sigma2);

Vec population_grad_general(const Classifier& w,
                            const dist::MixtureSignalSpec& signal,
                            const Mat& Sigma2);

double population_accuracy_general(const Classifier& w,
                                   const dist::MixtureSignalSpec& signal,
                                   const Mat& Sigma2);

// dL/dsigma = E_mu[q_sigma(mu)]; requires sigma > 0.
double dL_dsigma(const Classifier& w, const dist::GaussianTargetSpec& spec);
double dL_dsigma(const Classifier& w, const dist::MixtureSignalSpec& signal,
                 const Mat& Sigma2);

// Density of mu = w1' x1 at 0 for the mixture signal (d1 = 1).
double signal_density_at_zero(const Classifier& w,
                              const dist::MixtureSignalSpec& signal);

// ---------------------------------------------------------------------------
// Empirical quantities. Reductions use fixed-order pairwise summation so the
// result does not depend on how work is partitioned.
// ---------------------------------------------------------------------------

enum class Surrogate { exp_loss, ent_loss };

double empirical_loss(const Classifier& w, const dist::SampleBatch& batch,
                      Surrogate surrogate = Surrogate::exp_loss);

Vec empirical_grad(const Classifier& w, const dist::SampleBatch& batch,
                   Surrogate surrogate = Surrogate::exp_loss);

// Gradient of mean exp(-y * w'x) for fixed labels y.
Vec labeled_empirical_grad(const Classifier& w, const dist::SampleBatch& batch,
                           const Vec& labels);

// Fraction of samples with sign(w'x) = y.
double empirical_accuracy(const Classifier& w, const dist::SampleBatch& batch);

// ---------------------------------------------------------------------------
// Empirical-vs-population gradient deviation
// ---------------------------------------------------------------------------

struct DeviationRow {
  int n = 0;
  int trial = 0;
  double sup_dev = 0.0;
};

// For each sample size and trial, the max over the classifier grid and over
// the two directional projections (w1 block, w2 block) of
// |<grad Lhat - grad L, projected w>|.
std::vector<DeviationRow> grad_deviation(const dist::GaussianTargetSpec& spec,
                                         const std::vector<int>& n_list,
                                         int trials,
                                         const std::vector<Classifier>& w_grid,
                                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Loss-model abstraction consumed by the trainer
// ---------------------------------------------------------------------------

class LossModel {
 public:
  virtual ~LossModel() = default;

  // Called once per optimization step before loss/grad; lets empirical
  // models draw a fresh batch.
  virtual void begin_step(int /*step*/) {}

  virtual double loss(const Classifier& w) const = 0;
  virtual Vec grad(const Classifier& w) const = 0;

  // Gradient of the frozen-pseudo-label loss at w (labels from w itself).
  // Identical to grad() in the population case, where labeling with sign(w'x)
  // and differentiating gives the same integrand pointwise.
  virtual Vec pseudo_grad(const Classifier& w) const { return grad(w); }

  virtual double accuracy(const Classifier& w) const = 0;
  virtual double spurious_sigma(const Classifier& w) const = 0;
  virtual int d1() const = 0;
  virtual int d2() const = 0;
};

class PopulationGaussianModel final : public LossModel {
 public:
  explicit PopulationGaussianModel(dist::GaussianTargetSpec spec)
      : spec_(std::move(spec)) {}
  double loss(const Classifier& w) const override {
    return population_loss_gaussian(w, spec_);
  }
  Vec grad(const Classifier& w) const override {
    return population_grad_gaussian(w, spec_);
  }
  double accuracy(const Classifier& w) const override {
    return population_accuracy_gaussian(w, spec_);
  }
  double spurious_sigma(const Classifier& w) const override {
    return sigma_decomposition(w, spec_).sigma;
  }
  int d1() const override { return spec_.d1(); }
  int d2() const override { return spec_.d2(); }
  const dist::GaussianTargetSpec& spec() const { return spec_; }

 private:
  dist::GaussianTargetSpec spec_;
};

class PopulationMixtureModel final : public LossModel {
 public:
  PopulationMixtureModel(dist::MixtureSignalSpec signal, Mat Sigma2)
      : signal_(std::move(signal)), Sigma2_(std::move(Sigma2)) {}
  double loss(const Classifier& w) const override {
    return population_loss_general(w, signal_, Sigma2_);
  }
  Vec grad(const Classifier& w) const override {
    return population_grad_general(w, signal_, Sigma2_);
  }
  double accuracy(const Classifier& w) const override {
    return population_accuracy_general(w, signal_, Sigma2_);
  }
  double spurious_sigma(const Classifier& w) const override {
    return engine::spurious_sigma(w, Sigma2_);
  }
  int d1() const override { return 1; }
  int d2() const override { return static_cast<int>(Sigma2_.rows()); }

 private:
  dist::MixtureSignalSpec signal_;
  Mat Sigma2_;
};

class EmpiricalModel final : public LossModel {
 public:
  using BatchProvider = std::function<dist::SampleBatch(int step)>;

  explicit EmpiricalModel(dist::SampleBatch fixed_batch);
  explicit EmpiricalModel(BatchProvider provider);

  void set_surrogate(Surrogate s) { surrogate_ = s; }

  // Accuracy source: a closed-form Gaussian reference when available,
  // otherwise a held-out test batch.
  void set_accuracy_reference(dist::GaussianTargetSpec spec);
  void set_test_batch(dist::SampleBatch test);

  void begin_step(int step) override;
  double loss(const Classifier& w) const override {
    return empirical_loss(w, batch_, surrogate_);
  }
  Vec grad(const Classifier& w) const override {
    return empirical_grad(w, batch_, surrogate_);
  }
  Vec pseudo_grad(const Classifier& w) const override;
  double accuracy(const Classifier& w) const override;
  double spurious_sigma(const Classifier& w) const override;
  int d1() const override { return batch_.d1(); }
  int d2() const override { return batch_.d2(); }
  const dist::SampleBatch& batch() const { return batch_; }
  void set_batch(dist::SampleBatch b) { batch_ = std::move(b); }

 private:
  dist::SampleBatch batch_;
  BatchProvider provider_;
  Surrogate surrogate_ = Surrogate::exp_loss;
  bool has_reference_ = false;
  dist::GaussianTargetSpec reference_{Vec::Ones(1), 1.0, Mat::Identity(1, 1)};
  dist::SampleBatch test_batch_;
  bool has_test_batch_ = false;
};

}  // namespace spurlab::engine
