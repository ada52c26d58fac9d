#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace spurlab::dist {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Target with Gaussian signal: x1 ~ N(y*gamma, sigma1^2 I), x2 ~ N(0, Sigma2)
// independent of (x1, y), y uniform on {-1, +1}.
// ---------------------------------------------------------------------------
struct GaussianTargetSpec {
  Vec gamma;      // class-mean direction, length d1
  double sigma1 = 1.0;
  Mat Sigma2;     // spurious covariance, d2 x d2, strictly positive definite

  GaussianTargetSpec(Vec gamma_in, double sigma1_in, Mat Sigma2_in);

  int d1() const { return static_cast<int>(gamma.size()); }
  int d2() const { return static_cast<int>(Sigma2.rows()); }

  // Extreme eigenvalues of blockdiag(sigma1^2 I, Sigma2).
  double sigma_tilde_min() const;
  double sigma_tilde_max() const;

  const Mat& chol_lower() const { return chol_; }

 private:
  Mat chol_;  // Cholesky factor of Sigma2, validated at construction
};

// ---------------------------------------------------------------------------
// General 1-d signal components (log-concave, log-smooth)
// ---------------------------------------------------------------------------
struct LogConcaveComponent {
  std::function<double(double)> log_density;    // normalized
  std::function<double(double)> dlog_density;   // s(x) = (log p)'
  std::function<double(double)> d2log_density;  // (log p)''
  double class_sign = 1.0;                      // label carried by the component
  double support_lo = -10.0;                    // hint for envelope/quadrature
  double support_hi = 10.0;

  // Wraps a possibly-unnormalized log density: locates the mode by Newton,
  // computes the normalizer by quadrature and returns a component whose
  // density integrates to 1. Throws if the mode search fails or the density
  // is not concave at the mode.
  static LogConcaveComponent make(std::function<double(double)> log_f,
                                  std::function<double(double)> dlog_f,
                                  std::function<double(double)> d2log_f,
                                  double class_sign, double lo, double hi);

  static LogConcaveComponent gaussian(double mean, double stddev,
                                      double class_sign);

  double mode() const { return mode_; }

 private:
  double mode_ = 0.0;
  friend LogConcaveComponent shift(const LogConcaveComponent&, double);
};

// The same component translated by delta.
LogConcaveComponent shift(const LogConcaveComponent& c, double delta);

struct MixtureSignalSpec {
  std::vector<LogConcaveComponent> components;
  std::vector<double> weights;  // sums to 1

  MixtureSignalSpec(std::vector<LogConcaveComponent> comps,
                    std::vector<double> w);
  double tau_min() const;
};

// ---------------------------------------------------------------------------
// Source distribution of the 4-d toy problem: x1 ~ N(y*gamma, I) in 2-d and
// each spurious coordinate equals y*|z| with probability corr_prob (z a unit
// normal), otherwise z.
// ---------------------------------------------------------------------------
struct ToySourceSpec {
  Vec gamma;               // length-2 class mean
  double corr_prob = 0.8;
  int d2 = 2;
};

// ---------------------------------------------------------------------------
// Sampled data
// ---------------------------------------------------------------------------
struct SampleBatch {
  Mat x1;  // n x d1
  Mat x2;  // n x d2
  Vec y;   // entries +-1
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(y.size()); }
  int d1() const { return static_cast<int>(x1.cols()); }
  int d2() const { return static_cast<int>(x2.cols()); }

  // Header `y,x1_0..,x2_0..`, one row per sample, 17 significant digits.
  void write_csv(std::ostream& os) const;
};

// ---------------------------------------------------------------------------
// Samplers (pure functions of spec and seed)
// ---------------------------------------------------------------------------

SampleBatch sample_target(const GaussianTargetSpec& spec, int n,
                          std::uint64_t seed);

// Mixture signal with Gaussian spurious block Sigma2.
SampleBatch sample_target(const MixtureSignalSpec& signal, const Mat& Sigma2,
                          int n, std::uint64_t seed);

SampleBatch sample_source_toy(const ToySourceSpec& spec, int n,
                              std::uint64_t seed);

// Target counterpart of the toy source: same Gaussian signal, independent
// standard-normal spurious coordinates.
SampleBatch sample_target_toy(const ToySourceSpec& spec, int n,
                              std::uint64_t seed);

// Rejection sampler from the Gaussian envelope N(mode, 1/alpha); alpha is the
// estimated strong-concavity constant. Throws std::runtime_error if a point
// needs more than 1e6 proposals.
std::vector<double> sample_logconcave_1d(const LogConcaveComponent& component,
                                         int n, std::uint64_t seed);

// Scans d2log_density over [lo, hi] with the given step; alpha_hat is the
// most permissive concavity constant, beta_hat the smoothness constant.
// Throws std::runtime_error (naming the point) if the density fails to be
// concave anywhere on the grid.
struct ConcavityEstimate {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
};
ConcavityEstimate estimate_concavity(const LogConcaveComponent& component,
                                     double lo, double hi, double step = 1e-3);

// Accuracy of the best norm-constrained classifier (R, 0) on a Gaussian
// target: Phi(|gamma| / sigma1).
double bayes_accuracy(const GaussianTargetSpec& spec);

// Numerically integrated CDF of a component (for goodness-of-fit tests).
double component_cdf(const LogConcaveComponent& component, double x);

}  // namespace spurlab::dist
