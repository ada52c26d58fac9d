#include "spurlab/distributions.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "spurlab/kernels.hpp"
#include "spurlab/rng.hpp"
#include "spurlab/special_functions.hpp"

namespace spurlab::dist {
namespace {

void format_17g(std::ostream& os, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

}  // namespace

GaussianTargetSpec::GaussianTargetSpec(Vec gamma_in, double sigma1_in,
                                       Mat Sigma2_in)
    : gamma(std::move(gamma_in)), sigma1(sigma1_in), Sigma2(std::move(Sigma2_in)) {
  if (sigma1 <= 0.0)
    throw std::invalid_argument("GaussianTargetSpec: sigma1 must be > 0");
  if (Sigma2.rows() != Sigma2.cols() || Sigma2.rows() < 1)
    throw std::invalid_argument("GaussianTargetSpec: Sigma2 must be square");
  if (!Sigma2.isApprox(Sigma2.transpose(), 1e-12))
    throw std::invalid_argument("GaussianTargetSpec: Sigma2 must be symmetric");
  Eigen::LLT<Mat> llt(Sigma2);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument(
        "GaussianTargetSpec: Sigma2 must be positive definite");
  chol_ = llt.matrixL();
}

double GaussianTargetSpec::sigma_tilde_min() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(Sigma2);
  return std::sqrt(std::min(sigma1 * sigma1, es.eigenvalues().minCoeff()));
}

double GaussianTargetSpec::sigma_tilde_max() const {
  Eigen::SelfAdjointEigenSolver<Mat> es(Sigma2);
  return std::sqrt(std::max(sigma1 * sigma1, es.eigenvalues().maxCoeff()));
}

// ---------------------------------------------------------------------------
// LogConcaveComponent
// ---------------------------------------------------------------------------

LogConcaveComponent LogConcaveComponent::make(
    std::function<double(double)> log_f, std::function<double(double)> dlog_f,
    std::function<double(double)> d2log_f, double class_sign, double lo,
    double hi) {
  // Locate the mode by Newton from the hint midpoint, with bisection fallback
  // when a Newton step leaves the bracket.
  double x = 0.5 * (lo + hi);
  bool found = false;
  for (int it = 0; it < 200; ++it) {
    const double d1 = dlog_f(x);
    const double d2 = d2log_f(x);
    if (std::fabs(d1) < 1e-13) {
      found = true;
      break;
    }
    double step = (d2 < 0.0) ? -d1 / d2 : d1;  // gradient ascent if d2 >= 0
    if (!std::isfinite(step)) step = 0.0;
    double next = x + step;
    if (next <= lo || next >= hi) next = 0.5 * (x + ((d1 > 0.0) ? hi : lo));
    if (std::fabs(next - x) < 1e-15) {
      x = next;
      found = true;
      break;
    }
    x = next;
  }
  if (!found && std::fabs(dlog_f(x)) > 1e-9)
    throw std::runtime_error(
        "LogConcaveComponent: mode not found within 200 Newton iterations");
  if (d2log_f(x) >= 0.0)
    throw std::runtime_error(
        "LogConcaveComponent: density is not concave at the located mode");

  // Normalize by quadrature relative to the mode value.
  const double log_peak = log_f(x);
  const auto dens = [&](double t) { return std::exp(log_f(t) - log_peak); };
  const double z =
      kernels::adaptive_simpson(dens, lo, hi, 1e-12, 60) ;
  const double log_z = std::log(z) + log_peak;

  LogConcaveComponent c;
  c.log_density = [log_f, log_z](double t) { return log_f(t) - log_z; };
  c.dlog_density = std::move(dlog_f);
  c.d2log_density = std::move(d2log_f);
  c.class_sign = class_sign;
  c.support_lo = lo;
  c.support_hi = hi;
  c.mode_ = x;
  return c;
}

LogConcaveComponent LogConcaveComponent::gaussian(double mean, double stddev,
                                                  double class_sign) {
  if (stddev <= 0.0)
    throw std::invalid_argument("gaussian component: stddev must be > 0");
  const double v = stddev * stddev;
  const double log_norm = -0.5 * std::log(2.0 * 3.14159265358979323846 * v);
  LogConcaveComponent c;
  c.log_density = [mean, v, log_norm](double t) {
    return log_norm - 0.5 * (t - mean) * (t - mean) / v;
  };
  c.dlog_density = [mean, v](double t) { return -(t - mean) / v; };
  c.d2log_density = [v](double) { return -1.0 / v; };
  c.class_sign = class_sign;
  c.support_lo = mean - 12.0 * stddev;
  c.support_hi = mean + 12.0 * stddev;
  c.mode_ = mean;
  return c;
}

LogConcaveComponent shift(const LogConcaveComponent& c, double delta) {
  LogConcaveComponent out;
  out.log_density = [f = c.log_density, delta](double t) { return f(t - delta); };
  out.dlog_density = [f = c.dlog_density, delta](double t) { return f(t - delta); };
  out.d2log_density = [f = c.d2log_density, delta](double t) {
    return f(t - delta);
  };
  out.class_sign = c.class_sign;
  out.support_lo = c.support_lo + delta;
  out.support_hi = c.support_hi + delta;
  out.mode_ = c.mode_ + delta;
  return out;
}

MixtureSignalSpec::MixtureSignalSpec(std::vector<LogConcaveComponent> comps,
                                     std::vector<double> w)
    : components(std::move(comps)), weights(std::move(w)) {
  if (components.empty() || components.size() != weights.size())
    throw std::invalid_argument("MixtureSignalSpec: component/weight mismatch");
  double total = 0.0;
  for (double wi : weights) {
    if (wi <= 0.0)
      throw std::invalid_argument("MixtureSignalSpec: weights must be > 0");
    total += wi;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("MixtureSignalSpec: weights must sum to 1");
}

double MixtureSignalSpec::tau_min() const {
  double m = weights[0];
  for (double w : weights) m = std::min(m, w);
  return m;
}

// ---------------------------------------------------------------------------
// SampleBatch
// ---------------------------------------------------------------------------

void SampleBatch::write_csv(std::ostream& os) const {
  os << "y";
  for (int j = 0; j < d1(); ++j) os << ",x1_" << j;
  for (int j = 0; j < d2(); ++j) os << ",x2_" << j;
  os << "\n";
  for (int i = 0; i < n(); ++i) {
    format_17g(os, y(i));
    for (int j = 0; j < d1(); ++j) {
      os << ',';
      format_17g(os, x1(i, j));
    }
    for (int j = 0; j < d2(); ++j) {
      os << ',';
      format_17g(os, x2(i, j));
    }
    os << "\n";
  }
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

SampleBatch sample_target(const GaussianTargetSpec& spec, int n,
                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_target: n must be >= 1");
  SampleBatch b;
  b.seed = seed;
  b.x1.resize(n, spec.d1());
  b.x2.resize(n, spec.d2());
  b.y.resize(n);
  CounterRng rng(seed, /*stream=*/1);
  Vec z2(spec.d2());
  for (int i = 0; i < n; ++i) {
    const double yi = rng.sign();
    b.y(i) = yi;
    for (int j = 0; j < spec.d1(); ++j)
      b.x1(i, j) = yi * spec.gamma(j) + spec.sigma1 * rng.normal();
    for (int j = 0; j < spec.d2(); ++j) z2(j) = rng.normal();
    b.x2.row(i) = (spec.chol_lower() * z2).transpose();
  }
  return b;
}

SampleBatch sample_target(const MixtureSignalSpec& signal, const Mat& Sigma2,
                          int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_target: n must be >= 1");
  Eigen::LLT<Mat> llt(Sigma2);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sample_target: Sigma2 not positive definite");
  const Mat chol = llt.matrixL();

  // Per-component concavity constants for the rejection envelopes. The grid
  // estimate can overshoot the true constant by O(step^2), so it is shaved
  // slightly to keep the envelope valid.
  std::vector<double> alphas;
  alphas.reserve(signal.components.size());
  for (const auto& c : signal.components)
    alphas.push_back(
        0.999 *
        estimate_concavity(c, c.support_lo, c.support_hi, 1e-2).alpha_hat);

  SampleBatch b;
  b.seed = seed;
  b.x1.resize(n, 1);
  b.x2.resize(n, static_cast<int>(Sigma2.rows()));
  b.y.resize(n);
  CounterRng rng(seed, /*stream=*/2);
  Vec z2(Sigma2.rows());
  for (int i = 0; i < n; ++i) {
    // Component choice by inverse-CDF on the weights.
    double u = rng.uniform();
    std::size_t k = 0;
    for (; k + 1 < signal.weights.size(); ++k) {
      if (u <= signal.weights[k]) break;
      u -= signal.weights[k];
    }
    const auto& comp = signal.components[k];
    b.y(i) = comp.class_sign;

    // Rejection from N(mode, 1/alpha).
    const double alpha = alphas[k];
    const double env_sd = 1.0 / std::sqrt(alpha);
    const double log_peak = comp.log_density(comp.mode());
    bool accepted = false;
    for (long attempt = 0; attempt < 1000000; ++attempt) {
      const double x = comp.mode() + env_sd * rng.normal();
      const double log_accept = comp.log_density(x) - log_peak +
                                0.5 * alpha * (x - comp.mode()) * (x - comp.mode());
      if (std::log(rng.uniform()) <= log_accept) {
        b.x1(i, 0) = x;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw std::runtime_error(
          "sample_target: rejection sampler exceeded 1e6 proposals for one "
          "point; envelope construction is unsound for this component");

    for (int j = 0; j < z2.size(); ++j) z2(j) = rng.normal();
    b.x2.row(i) = (chol * z2).transpose();
  }
  return b;
}

SampleBatch sample_source_toy(const ToySourceSpec& spec, int n,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_source_toy: n must be >= 1");
  if (spec.corr_prob < 0.0 || spec.corr_prob > 1.0)
    throw std::invalid_argument("sample_source_toy: corr_prob out of [0,1]");
  SampleBatch b;
  b.seed = seed;
  const int d1 = static_cast<int>(spec.gamma.size());
  b.x1.resize(n, d1);
  b.x2.resize(n, spec.d2);
  b.y.resize(n);
  CounterRng rng(seed, /*stream=*/3);
  for (int i = 0; i < n; ++i) {
    const double yi = rng.sign();
    b.y(i) = yi;
    for (int j = 0; j < d1; ++j) b.x1(i, j) = yi * spec.gamma(j) + rng.normal();
    for (int j = 0; j < spec.d2; ++j) {
      const double z = rng.normal();
      const bool correlated = rng.uniform() <= spec.corr_prob;
      b.x2(i, j) = correlated ? yi * std::fabs(z) : z;
    }
  }
  return b;
}

SampleBatch sample_target_toy(const ToySourceSpec& spec, int n,
                              std::uint64_t seed) {
  GaussianTargetSpec target(spec.gamma, 1.0,
                            Mat::Identity(spec.d2, spec.d2));
  return sample_target(target, n, seed);
}

std::vector<double> sample_logconcave_1d(const LogConcaveComponent& component,
                                         int n, std::uint64_t seed) {
  const double alpha =
      0.999 * estimate_concavity(component, component.support_lo,
                                 component.support_hi, 1e-2)
                  .alpha_hat;
  const double env_sd = 1.0 / std::sqrt(alpha);
  const double log_peak = component.log_density(component.mode());
  std::vector<double> out;
  out.reserve(n);
  CounterRng rng(seed, /*stream=*/4);
  for (int i = 0; i < n; ++i) {
    bool accepted = false;
    for (long attempt = 0; attempt < 1000000; ++attempt) {
      const double x = component.mode() + env_sd * rng.normal();
      const double la = component.log_density(x) - log_peak +
                        0.5 * alpha * (x - component.mode()) *
                            (x - component.mode());
      if (std::log(rng.uniform()) <= la) {
        out.push_back(x);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw std::runtime_error(
          "sample_logconcave_1d: rejection sampler exceeded 1e6 proposals");
  }
  return out;
}

ConcavityEstimate estimate_concavity(const LogConcaveComponent& component,
                                     double lo, double hi, double step) {
  if (!(hi > lo) || step <= 0.0)
    throw std::invalid_argument("estimate_concavity: bad grid");
  ConcavityEstimate e;
  double max_d2 = -std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  for (double x = lo; x <= hi; x += step) {
    const double d2 = component.d2log_density(x);
    if (d2 > 0.0)
      throw std::runtime_error(
          "estimate_concavity: density not log-concave at x = " +
          std::to_string(x) + " (d2 log p = " + std::to_string(d2) + ")");
    max_d2 = std::max(max_d2, d2);
    max_abs = std::max(max_abs, std::fabs(d2));
  }
  e.alpha_hat = -max_d2;
  e.beta_hat = max_abs;
  return e;
}

double bayes_accuracy(const GaussianTargetSpec& spec) {
  return normal_cdf(spec.gamma.norm() / spec.sigma1);
}

double component_cdf(const LogConcaveComponent& component, double x) {
  const double lo = component.support_lo;
  if (x <= lo) return 0.0;
  const auto dens = [&](double t) { return std::exp(component.log_density(t)); };
  return kernels::adaptive_simpson(dens, lo, std::min(x, component.support_hi),
                                   1e-12, 60);
}

}  // namespace spurlab::dist
