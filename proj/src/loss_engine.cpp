#include "spurlab/loss_engine.hpp"

#include <cmath>
#include <stdexcept>

#include "spurlab/kernels.hpp"
#include "spurlab/special_functions.hpp"

namespace spurlab::engine {
namespace {

// Deterministic pairwise reduction over [lo, hi); straight loop at the leaves.
template <class F>
double pairwise_sum(int lo, int hi, const F& f) {
  if (hi - lo <= 64) {
    double s = 0.0;
    for (int i = lo; i < hi; ++i) s += f(i);
    return s;
  }
  const int mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, f) + pairwise_sum(mid, hi, f);
}

template <class F>
Vec pairwise_sum_vec(int lo, int hi, int dim, const F& accumulate) {
  if (hi - lo <= 256) {
    Vec s = Vec::Zero(dim);
    for (int i = lo; i < hi; ++i) accumulate(i, s);
    return s;
  }
  const int mid = lo + (hi - lo) / 2;
  return pairwise_sum_vec(lo, mid, dim, accumulate) +
         pairwise_sum_vec(mid, hi, dim, accumulate);
}

double surrogate_value(Surrogate s, double t) {
  return s == Surrogate::exp_loss ? kernels::loss_exp(t) : kernels::loss_ent(t);
}

double surrogate_deriv(Surrogate s, double t) {
  return s == Surrogate::exp_loss ? kernels::loss_exp_deriv(t)
                                  : kernels::loss_ent_deriv(t);
}

// Truncated integration range of a component: expand from the mode until the
// log density has dropped by 60 (density ratio below 1e-26) or the support
// hint ends.
std::pair<double, double> component_range(const dist::LogConcaveComponent& c) {
  const double peak = c.log_density(c.mode());
  double lo = c.mode(), hi = c.mode();
  const double span = std::max(1.0, 0.05 * (c.support_hi - c.support_lo));
  while (lo > c.support_lo && c.log_density(lo) > peak - 60.0) lo -= span * 0.1;
  while (hi < c.support_hi && c.log_density(hi) > peak - 60.0) hi += span * 0.1;
  return {std::max(lo, c.support_lo), std::min(hi, c.support_hi)};
}

// E_{x ~ component}[ f(x) ] by adaptive quadrature, abs tol 1e-10.
double component_expectation(const dist::LogConcaveComponent& c,
                             const std::function<double(double)>& f) {
  auto [lo, hi] = component_range(c);
  const auto integrand = [&](double x) {
    return std::exp(c.log_density(x)) * f(x);
  };
  try {
    return kernels::adaptive_simpson(integrand, lo, hi, 1e-10, 30);
  } catch (const std::runtime_error&) {
    throw std::runtime_error(
        "population quadrature: no convergence at depth 30 on [" +
        std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

Classifier::Classifier(Vec w1_in, Vec w2_in, double R_in)
    : w1(std::move(w1_in)), w2(std::move(w2_in)), R(R_in) {
  if (R <= 0.0) throw std::invalid_argument("Classifier: R must be > 0");
  if (norm() > R + 1e-12)
    throw std::invalid_argument("Classifier: |w| exceeds projection radius");
}

double Classifier::norm() const {
  return std::sqrt(w1.squaredNorm() + w2.squaredNorm());
}

Vec Classifier::full() const {
  Vec w(w1.size() + w2.size());
  w << w1, w2;
  return w;
}

Classifier Classifier::from_full(const Vec& w, int d1, double R) {
  return Classifier(w.head(d1), w.tail(w.size() - d1), R);
}

SigmaDecomposition sigma_decomposition(const Classifier& w,
                                       const dist::GaussianTargetSpec& spec) {
  SigmaDecomposition out;
  out.sigma = spurious_sigma(w, spec.Sigma2);
  out.sigma_tilde = std::sqrt(w.w1.squaredNorm() * spec.sigma1 * spec.sigma1 +
                              out.sigma * out.sigma);
  return out;
}

double spurious_sigma(const Classifier& w, const Mat& Sigma2) {
  return std::sqrt(w.w2.dot(Sigma2 * w.w2));
}

// ---------------------------------------------------------------------------
// Gaussian population quantities
// ---------------------------------------------------------------------------

double population_loss_gaussian(const Classifier& w,
                                const dist::GaussianTargetSpec& spec) {
  const auto sd = sigma_decomposition(w, spec);
  return kernels::g_sigma(w.w1.dot(spec.gamma), sd.sigma_tilde);
}

Vec population_grad_gaussian(const Classifier& w,
                             const dist::GaussianTargetSpec& spec) {
  const auto sd = sigma_decomposition(w, spec);
  const double mu = w.w1.dot(spec.gamma);
  Vec g(w.d1() + w.d2());
  if (sd.sigma_tilde == 0.0) {
    // Subgradient limit at w = 0: only the mu-direction term survives.
    g.head(w.d1()) = kernels::loss_exp_deriv(mu) * spec.gamma;
    g.tail(w.d2()).setZero();
    return g;
  }
  const double dmu = kernels::g_sigma_dmu(mu, sd.sigma_tilde);
  const double q = kernels::q_sigma(mu, sd.sigma_tilde);
  g.head(w.d1()) = dmu * spec.gamma +
                   q * (spec.sigma1 * spec.sigma1 / sd.sigma_tilde) * w.w1;
  g.tail(w.d2()) = (q / sd.sigma_tilde) * (spec.Sigma2 * w.w2);
  return g;
}

double population_accuracy_gaussian(const Classifier& w,
                                    const dist::GaussianTargetSpec& spec) {
  const auto sd = sigma_decomposition(w, spec);
  const double mu = w.w1.dot(spec.gamma);
  if (sd.sigma_tilde == 0.0) return mu > 0.0 ? 1.0 : (mu < 0.0 ? 0.0 : 0.5);
  return normal_cdf(mu / sd.sigma_tilde);
}

double dL_dsigma(const Classifier& w, const dist::GaussianTargetSpec& spec) {
  const auto sd = sigma_decomposition(w, spec);
  if (sd.sigma <= 0.0) throw std::invalid_argument("dL_dsigma: sigma must be > 0");
  // L depends on w2 only through sigma_tilde; dL/dsigma follows from
  // sigma_tilde^2 = |w1|^2 sigma1^2 + sigma^2.
  return kernels::q_sigma(w.w1.dot(spec.gamma), sd.sigma_tilde) * sd.sigma /
         sd.sigma_tilde;
}

// ---------------------------------------------------------------------------
// General mixture population quantities (d1 = 1)
// ---------------------------------------------------------------------------

namespace {

void require_d1_is_1(const Classifier& w, const char* who) {
  if (w.d1() != 1)
    throw std::invalid_argument(std::string(who) +
                                ": the quadrature path requires d1 = 1");
}

}  // namespace

double population_loss_general(const Classifier& w,
                               const dist::MixtureSignalSpec& signal,
                               const Mat& Sigma2) {
  require_d1_is_1(w, "population_loss_general");
  const double w1 = w.w1(0);
  const double sigma = spurious_sigma(w, Sigma2);
  double total = 0.0;
  for (std::size_t k = 0; k < signal.components.size(); ++k) {
    total += signal.weights[k] *
             component_expectation(signal.components[k], [&](double x) {
               return kernels::g_sigma(w1 * x, sigma);
             });
  }
  return total;
}

Vec population_grad_general(const Classifier& w,
                            const dist::MixtureSignalSpec& signal,
                            const Mat& Sigma2) {
  require_d1_is_1(w, "population_grad_general");
  const double w1 = w.w1(0);
  const double sigma = spurious_sigma(w, Sigma2);
  double dw1 = 0.0;
  for (std::size_t k = 0; k < signal.components.size(); ++k) {
    dw1 += signal.weights[k] *
           component_expectation(signal.components[k], [&](double x) {
             return x * kernels::g_sigma_dmu(w1 * x, sigma);
           });
  }
  Vec g(1 + w.d2());
  g(0) = dw1;
  if (sigma > 0.0) {
    g.tail(w.d2()) =
        (dL_dsigma(w, signal, Sigma2) / sigma) * (Sigma2 * w.w2);
  } else {
    g.tail(w.d2()).setZero();
  }
  return g;
}

double population_accuracy_general(const Classifier& w,
                                   const dist::MixtureSignalSpec& signal,
                                   const Mat& Sigma2) {
  require_d1_is_1(w, "population_accuracy_general");
  const double w1 = w.w1(0);
  const double sigma = spurious_sigma(w, Sigma2);
  double acc = 0.0;
  for (std::size_t k = 0; k < signal.components.size(); ++k) {
    const double s = signal.components[k].class_sign;
    acc += signal.weights[k] *
           component_expectation(signal.components[k], [&](double x) {
             const double m = s * w1 * x;
             if (sigma == 0.0) return m > 0.0 ? 1.0 : (m < 0.0 ? 0.0 : 0.5);
             return normal_cdf(m / sigma);
           });
  }
  return acc;
}

double dL_dsigma(const Classifier& w, const dist::MixtureSignalSpec& signal,
                 const Mat& Sigma2) {
  require_d1_is_1(w, "dL_dsigma");
  const double w1 = w.w1(0);
  const double sigma = spurious_sigma(w, Sigma2);
  if (sigma <= 0.0) throw std::invalid_argument("dL_dsigma: sigma must be > 0");
  double total = 0.0;
  for (std::size_t k = 0; k < signal.components.size(); ++k) {
    total += signal.weights[k] *
             component_expectation(signal.components[k], [&](double x) {
               return kernels::q_sigma(w1 * x, sigma);
             });
  }
  return total;
}

double signal_density_at_zero(const Classifier& w,
                              const dist::MixtureSignalSpec& signal) {
  require_d1_is_1(w, "signal_density_at_zero");
  const double w1 = w.w1(0);
  if (w1 == 0.0)
    throw std::invalid_argument("signal_density_at_zero: w1 must be nonzero");
  // Density of w1*x at 0 is p_x(0) / |w1|.
  double p = 0.0;
  for (std::size_t k = 0; k < signal.components.size(); ++k)
    p += signal.weights[k] *
         std::exp(signal.components[k].log_density(0.0)) / std::fabs(w1);
  return p;
}

// ---------------------------------------------------------------------------
// Empirical quantities
// ---------------------------------------------------------------------------

double empirical_loss(const Classifier& w, const dist::SampleBatch& batch,
                      Surrogate surrogate) {
  const Vec t = batch.x1 * w.w1 + batch.x2 * w.w2;
  return pairwise_sum(0, batch.n(),
                      [&](int i) { return surrogate_value(surrogate, t(i)); }) /
         batch.n();
}

Vec empirical_grad(const Classifier& w, const dist::SampleBatch& batch,
                   Surrogate surrogate) {
  const Vec t = batch.x1 * w.w1 + batch.x2 * w.w2;
  const int d1 = batch.d1(), d2 = batch.d2();
  Vec g = pairwise_sum_vec(0, batch.n(), d1 + d2, [&](int i, Vec& s) {
    const double e = surrogate_deriv(surrogate, t(i));
    s.head(d1) += e * batch.x1.row(i).transpose();
    s.tail(d2) += e * batch.x2.row(i).transpose();
  });
  return g / batch.n();
}

Vec labeled_empirical_grad(const Classifier& w, const dist::SampleBatch& batch,
                           const Vec& labels) {
  if (labels.size() != batch.n())
    throw std::invalid_argument("labeled_empirical_grad: label count mismatch");
  const Vec t = batch.x1 * w.w1 + batch.x2 * w.w2;
  const int d1 = batch.d1(), d2 = batch.d2();
  Vec g = pairwise_sum_vec(0, batch.n(), d1 + d2, [&](int i, Vec& s) {
    const double e = -labels(i) * std::exp(-labels(i) * t(i));
    s.head(d1) += e * batch.x1.row(i).transpose();
    s.tail(d2) += e * batch.x2.row(i).transpose();
  });
  return g / batch.n();
}

double empirical_accuracy(const Classifier& w, const dist::SampleBatch& batch) {
  const Vec t = batch.x1 * w.w1 + batch.x2 * w.w2;
  const double hits = pairwise_sum(
      0, batch.n(), [&](int i) { return t(i) * batch.y(i) > 0.0 ? 1.0 : 0.0; });
  return hits / batch.n();
}

// ---------------------------------------------------------------------------
// Gradient deviation table
// ---------------------------------------------------------------------------

std::vector<DeviationRow> grad_deviation(const dist::GaussianTargetSpec& spec,
                                         const std::vector<int>& n_list,
                                         int trials,
                                         const std::vector<Classifier>& w_grid,
                                         std::uint64_t seed) {
  if (w_grid.empty())
    throw std::invalid_argument("grad_deviation: w_grid must be nonempty");

  // Population directional derivatives per grid point, computed once.
  std::vector<std::pair<double, double>> pop;
  pop.reserve(w_grid.size());
  for (const auto& w : w_grid) {
    const Vec g = population_grad_gaussian(w, spec);
    pop.emplace_back(g.head(w.d1()).dot(w.w1), g.tail(w.d2()).dot(w.w2));
  }

  std::vector<DeviationRow> rows;
  rows.reserve(n_list.size() * trials);
  std::uint64_t stream = 0;
  for (int n : n_list) {
    for (int trial = 0; trial < trials; ++trial) {
      const auto batch = sample_target(spec, n, seed + 7919 * ++stream);
      double sup = 0.0;
      for (std::size_t j = 0; j < w_grid.size(); ++j) {
        const auto& w = w_grid[j];
        const Vec t = batch.x1 * w.w1 + batch.x2 * w.w2;
        double s1 = 0.0, s2 = 0.0;
        const Vec m1 = batch.x1 * w.w1;
        const Vec m2 = batch.x2 * w.w2;
        s1 = pairwise_sum(0, n, [&](int i) {
          return kernels::loss_exp_deriv(t(i)) * m1(i);
        });
        s2 = pairwise_sum(0, n, [&](int i) {
          return kernels::loss_exp_deriv(t(i)) * m2(i);
        });
        sup = std::max(sup, std::fabs(s1 / n - pop[j].first));
        sup = std::max(sup, std::fabs(s2 / n - pop[j].second));
      }
      rows.push_back({n, trial, sup});
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// EmpiricalModel
// ---------------------------------------------------------------------------

EmpiricalModel::EmpiricalModel(dist::SampleBatch fixed_batch)
    : batch_(std::move(fixed_batch)) {}

EmpiricalModel::EmpiricalModel(BatchProvider provider)
    : provider_(std::move(provider)) {
  batch_ = provider_(0);
}

void EmpiricalModel::set_accuracy_reference(dist::GaussianTargetSpec spec) {
  reference_ = std::move(spec);
  has_reference_ = true;
}

void EmpiricalModel::set_test_batch(dist::SampleBatch test) {
  test_batch_ = std::move(test);
  has_test_batch_ = true;
}

void EmpiricalModel::begin_step(int step) {
  if (provider_ && step > 0) batch_ = provider_(step);
}

Vec EmpiricalModel::pseudo_grad(const Classifier& w) const {
  const Vec t = batch_.x1 * w.w1 + batch_.x2 * w.w2;
  Vec labels(t.size());
  for (int i = 0; i < t.size(); ++i)
    labels(i) = t(i) > 0.0 ? 1.0 : (t(i) < 0.0 ? -1.0 : 0.0);
  return labeled_empirical_grad(w, batch_, labels);
}

double EmpiricalModel::accuracy(const Classifier& w) const {
  if (has_reference_) return population_accuracy_gaussian(w, reference_);
  if (has_test_batch_) return empirical_accuracy(w, test_batch_);
  return empirical_accuracy(w, batch_);
}

double EmpiricalModel::spurious_sigma(const Classifier& w) const {
  if (has_reference_) return engine::spurious_sigma(w, reference_.Sigma2);
  return w.w2.norm();  // identity spurious covariance assumed
}

}  // namespace spurlab::engine
