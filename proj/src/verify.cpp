#include "spurlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "spurlab/kernels.hpp"
#include "spurlab/rng.hpp"
#include "spurlab/special_functions.hpp"
#include "spurlab/trainer.hpp"

namespace spurlab::verify {
namespace {

constexpr double kSlack = 1e-10;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string point2(const char* a, double va, const char* b, double vb) {
  return std::string(a) + "=" + fmt(va) + " " + b + "=" + fmt(vb);
}

// Appends a (point, measured, required) row; drops rows beyond a cap so a
// fully failing grid does not produce megabytes of witnesses.
void add_witness(VerificationReport& rep, std::string point, double measured,
                 double required, std::size_t cap = 64) {
  if (rep.witnesses.size() < cap)
    rep.witnesses.push_back({std::move(point), measured, required});
}

// Tracks the worst margin over a grid and keeps its witness at slot 0.
struct WorstTracker {
  double margin = std::numeric_limits<double>::infinity();
  Witness witness;
  void update(std::string point, double measured, double required) {
    if (measured - required < margin) {
      margin = measured - required;
      witness = {std::move(point), measured, required};
    }
  }
};

double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol, double* argmin) {
  const double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  const double x = 0.5 * (lo + hi);
  if (argmin) *argmin = x;
  return f(x);
}

}  // namespace

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::passed:
      return "pass";
    case CheckStatus::failed:
      return "fail";
    case CheckStatus::not_applicable:
      return "not_applicable";
  }
  return "?";
}

const Witness* VerificationReport::worst_witness() const {
  const Witness* worst = nullptr;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : witnesses) {
    const double margin = w.measured - w.required;
    if (margin < best) {
      best = margin;
      worst = &w;
    }
  }
  return worst;
}

std::string VerificationReport::summary_line() const {
  const Witness* w = worst_witness();
  std::string ww = w ? (w->point + " measured=" + fmt(w->measured) +
                        " required=" + fmt(w->required))
                     : "none";
  std::replace(ww.begin(), ww.end(), ',', ';');
  return check_name + "," + to_string(status) + "," + ww + "," + fmt(tolerance);
}

// ---------------------------------------------------------------------------
// Assumption checkers
// ---------------------------------------------------------------------------

VerificationReport check_separation(const dist::MixtureSignalSpec& signal,
                                    double alpha, double beta) {
  VerificationReport rep;
  rep.check_name = "separation_assumption";
  const Mat none = Mat::Identity(1, 1);
  const auto loss_at = [&](double w1) {
    const Classifier w(Vec::Constant(1, w1), Vec::Zero(1), 2.0);
    // sigma = 0 path: spurious block zeroed.
    return engine::population_loss_general(w, signal, none);
  };
  double arg_pos = 0.0, arg_neg = 0.0;
  const double min_pos = golden_min(loss_at, 1e-6, 1.0, 1e-10, &arg_pos);
  const double min_neg = golden_min(loss_at, -1.0, -1e-6, 1e-10, &arg_neg);
  const double best = std::min(min_pos, min_neg);
  const double best_arg = (min_pos <= min_neg) ? arg_pos : arg_neg;
  const double threshold = signal.tau_min() * kernels::kappa_min(beta, alpha);

  rep.status = best <= threshold ? CheckStatus::passed : CheckStatus::failed;
  add_witness(rep, point2("w1", best_arg, "min_loss", best), best, threshold);
  add_witness(rep, "log10(min_loss/threshold)",
              std::log10(best) - std::log10(threshold), 0.0);
  return rep;
}

VerificationReport check_init(const Classifier& w_s, const Mat& Sigma2,
                              double alpha, double beta, double L_ws,
                              double tau_min) {
  VerificationReport rep;
  rep.check_name = "init_assumption";
  bool ok = true;

  const double mass = w_s.w1.norm();
  ok &= mass >= 0.5;
  add_witness(rep, "norm_w1", mass, 0.5);

  const double sigma_sq = w_s.w2.dot(Sigma2 * w_s.w2);
  const double log_term =
      (beta * std::fabs(std::log(beta)) > 0.0)
          ? 1.0 / (beta * std::fabs(std::log(beta)))
          : std::numeric_limits<double>::infinity();
  const double cap =
      0.03 * std::min(std::min(1.0, alpha / (beta * beta)),
                      std::min(1.0 / beta, log_term));
  ok &= sigma_sq <= cap;  // boundary counts as satisfied
  add_witness(rep, "spurious_variance_cap_minus_sigma_sq", cap - sigma_sq, 0.0);

  const double threshold = tau_min * kernels::kappa_min(beta, alpha);
  ok &= L_ws <= threshold;
  add_witness(rep, "loss_threshold_minus_L", threshold - L_ws, 0.0);
  add_witness(rep, "log10(L/threshold)",
              std::log10(L_ws) - std::log10(threshold), 0.0);

  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

SafeSetResult in_safe_set(const Classifier& w,
                          const dist::GaussianTargetSpec& spec, double R) {
  if (spec.d1() != 1)
    throw std::invalid_argument("in_safe_set: requires d1 = 1");
  SafeSetResult out;
  out.threshold_a = kernels::r_threshold(R * spec.sigma_tilde_max());
  const double margin_value = w.w1(0) * spec.gamma(0);
  out.margin = margin_value - out.threshold_a;
  out.inside = out.margin >= 0.0 && w.norm() <= R + 1e-9;
  return out;
}

double safe_set_error_level(const dist::GaussianTargetSpec& spec, double R) {
  const double a = kernels::r_threshold(R * spec.sigma_tilde_max());
  return 0.5 * erfc(a / (std::sqrt(2.0) * R * spec.sigma_tilde_min()));
}

// ---------------------------------------------------------------------------
// Grid certificates
// ---------------------------------------------------------------------------

VerificationReport verify_q_threshold(const GridSpec& grid) {
  VerificationReport rep;
  rep.check_name = "q_threshold_bound";
  rep.tolerance = kSlack;
  WorstTracker worst;
  bool ok = true;
  for (double s = grid.sigma_lo; s <= grid.sigma_hi + 1e-12;
       s += grid.sigma_step) {
    const double r = kernels::r_threshold(s);
    for (double mu = r; mu <= r + grid.mu_extent + 1e-12; mu += grid.mu_step) {
      const double q = kernels::q_sigma(mu, s);
      const double bound = 0.25 * s * kernels::loss_exp(mu);
      worst.update(point2("sigma", s, "mu", mu), q, bound);
      if (q - bound < -kSlack) {
        ok = false;
        add_witness(rep, point2("sigma", s, "mu", mu), q, bound);
      }
    }
  }
  rep.witnesses.insert(rep.witnesses.begin(), worst.witness);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

VerificationReport verify_q_floor(const GridSpec& grid) {
  VerificationReport rep;
  rep.check_name = "q_derivative_floor";
  rep.tolerance = kSlack;
  WorstTracker worst;
  bool ok = true;
  for (double s = grid.sigma_lo; s <= grid.sigma_hi + 1e-12;
       s += grid.sigma_step) {
    for (double mu = 0.0; mu <= 30.0 + 1e-12; mu += grid.mu_step) {
      const double q = kernels::q_sigma(mu, s);
      const double floor = -kernels::q_sigma_floor(mu, s);
      worst.update(point2("sigma", s, "mu", mu), q, floor);
      if (q - floor < -kSlack) {
        ok = false;
        add_witness(rep, point2("sigma", s, "mu", mu), q, floor);
      }
    }
  }
  rep.witnesses.insert(rep.witnesses.begin(), worst.witness);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

VerificationReport verify_g_bounds(const GridSpec& grid) {
  VerificationReport rep;
  rep.check_name = "g_envelope_bounds";
  rep.tolerance = kSlack;
  WorstTracker worst;
  bool ok = true;
  for (double s = grid.sigma_lo; s <= 1.0 + 1e-12; s += grid.sigma_step) {
    for (double mu = 0.0; mu <= 30.0 + 1e-12; mu += grid.mu_step) {
      const double g = kernels::g_sigma(mu, s);
      const double lower = 0.25 * kernels::loss_exp(mu);
      worst.update(point2("sigma", s, "mu", mu) + " lower", g, lower);
      if (g - lower < -kSlack) {
        ok = false;
        add_witness(rep, point2("sigma", s, "mu", mu) + " lower", g, lower);
      }
      if (s <= 0.5 + 1e-12) {
        const double upper = 2.0 * kernels::loss_exp(mu);
        worst.update(point2("sigma", s, "mu", mu) + " upper", upper, g);
        if (upper - g < -kSlack) {
          ok = false;
          add_witness(rep, point2("sigma", s, "mu", mu) + " upper", g, upper);
        }
      }
    }
  }
  rep.witnesses.insert(rep.witnesses.begin(), worst.witness);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

VerificationReport verify_backend_agreement(const GridSpec& grid) {
  VerificationReport rep;
  rep.check_name = "g_backend_agreement";
  rep.tolerance = 1e-8;
  double worst_err = 0.0;
  Witness worst{"none", 0.0, 0.0};
  bool ok = true;
  for (double s = grid.sigma_lo; s <= grid.sigma_hi + 1e-12;
       s += grid.sigma_step) {
    const double r = kernels::r_threshold(s);
    // Sparser mu sampling: the quadrature side is the expensive one.
    for (double mu : {0.0, 0.5 * r, r, r + 0.5 * grid.mu_extent,
                      r + grid.mu_extent}) {
      const double err =
          std::fabs(kernels::g_sigma(mu, s) -
                    kernels::g_sigma_quadrature(mu, s, 96));
      if (err > worst_err) {
        worst_err = err;
        worst = {point2("sigma", s, "mu", mu), err, rep.tolerance};
      }
      if (err > rep.tolerance) {
        ok = false;
        add_witness(rep, point2("sigma", s, "mu", mu), err, rep.tolerance);
      }
    }
  }
  worst.required = rep.tolerance;
  rep.witnesses.insert(rep.witnesses.begin(), worst);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

VerificationReport verify_q_finite_difference(const GridSpec& grid) {
  VerificationReport rep;
  rep.check_name = "q_matches_finite_difference";
  rep.tolerance = 1e-6;
  const double h = 1e-5;
  double worst_err = 0.0;
  Witness worst{"none", 0.0, 0.0};
  bool ok = true;
  for (double s = grid.sigma_lo; s <= grid.sigma_hi + 1e-12;
       s += 4.0 * grid.sigma_step) {
    const double r = kernels::r_threshold(s);
    for (double mu : {0.0, 0.3, 1.0, 3.0, r, r + 5.0}) {
      const double fd =
          (kernels::g_sigma(mu, s + h) - kernels::g_sigma(mu, s - h)) /
          (2.0 * h);
      const double err = std::fabs(kernels::q_sigma(mu, s) - fd);
      if (err > worst_err) {
        worst_err = err;
        worst = {point2("sigma", s, "mu", mu), err, rep.tolerance};
      }
      if (err > rep.tolerance) {
        ok = false;
        add_witness(rep, point2("sigma", s, "mu", mu), err, rep.tolerance);
      }
    }
  }
  rep.witnesses.insert(rep.witnesses.begin(), worst);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

VerificationReport verify_q_sign_change(const GridSpec& grid) {
  VerificationReport rep;
  rep.check_name = "q_sign_change_and_root";
  bool ok = true;
  for (double s = grid.sigma_lo; s <= grid.sigma_hi + 1e-12;
       s += grid.sigma_step) {
    const double r = kernels::r_threshold(s);
    const double q0 = kernels::q_sigma(0.0, s);
    const double qr = kernels::q_sigma(r + 1e-6, s);
    const double root = kernels::q_sigma_root(s);
    if (!(q0 < 0.0 && qr > 0.0 && root <= r)) {
      ok = false;
      add_witness(rep, point2("sigma", s, "root", root), root, r);
    }
  }
  if (rep.witnesses.empty())
    add_witness(rep, "all sigma: q(0)<0<q(r+eps), root<=r", 1.0, 1.0);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

VerificationReport verify_integral_identities() {
  VerificationReport rep;
  rep.check_name = "gaussian_integral_identities";
  rep.tolerance = 1e-9;
  bool ok = true;
  double worst_err = 0.0;
  Witness worst{"none", 0.0, 0.0};
  for (double a : {-2.0, 0.0, 2.0}) {
    for (double b : {0.5, 1.0, 2.0}) {
      const auto f = [a, b](double x) {
        return std::exp(a * x - 0.5 * b * x * x);
      };
      // Integration range wide enough that the dropped tails are < 1e-12.
      const double span = std::fabs(a) / b + 14.0 / std::sqrt(b);
      const double full = kernels::adaptive_simpson(f, -span, span, 1e-12);
      const double half = kernels::adaptive_simpson(f, 0.0, span, 1e-12);
      const double err = std::max(
          std::fabs(full - kernels::integral_exp_quadratic_full(a, b)),
          std::fabs(half - kernels::integral_exp_quadratic_half(a, b)));
      if (err > worst_err) {
        worst_err = err;
        worst = {point2("a", a, "b", b), err, rep.tolerance};
      }
      if (err > rep.tolerance) {
        ok = false;
        add_witness(rep, point2("a", a, "b", b), err, rep.tolerance);
      }
    }
  }
  rep.witnesses.insert(rep.witnesses.begin(), worst);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

VerificationReport verify_kappa_properties() {
  VerificationReport rep;
  rep.check_name = "kappa_properties";
  bool ok = true;

  for (double nu : {0.25, 1.0, 2.0}) {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 32; ++i) {
      const double rho = nu * (1.0 + 9.0 * i / 32.0);
      const double kt = kernels::kappa_constants(rho, nu).kappa_tilde;
      if (kt > prev * (1.0 + 1e-12)) {
        ok = false;
        add_witness(rep, point2("nu", nu, "rho", rho), kt, prev);
      }
      prev = kt;
    }
  }
  for (double alpha : {0.5, 1.0}) {
    for (double beta : {1.0, 3.0}) {
      if (beta < alpha) continue;
      const double k = kernels::kappa_min(beta, alpha);
      const double kt = kernels::kappa_constants(beta, alpha).kappa_tilde;
      if (k > kt * (1.0 + 1e-12)) {
        ok = false;
        add_witness(rep, point2("beta", beta, "alpha", alpha), k, kt);
      }
    }
  }
  if (rep.witnesses.empty())
    add_witness(rep, "monotonicity and min-over-a dominance", 1.0, 1.0);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

// ---------------------------------------------------------------------------
// Contraction-chain certificate
// ---------------------------------------------------------------------------

VerificationReport verify_loss_thresholds(
    const dist::LogConcaveComponent& component, const Classifier& w,
    const Mat& Sigma2) {
  VerificationReport rep;
  rep.check_name = "loss_threshold_chain";

  const auto conc = dist::estimate_concavity(component, component.support_lo,
                                             component.support_hi, 1e-3);
  const double w1 = std::fabs(w.w1(0));
  if (w1 <= 0.0)
    throw std::invalid_argument("verify_loss_thresholds: w1 must be nonzero");
  // Density of mu = w1 x transforms the constants by 1/w1^2.
  const double nu = conc.alpha_hat / (w1 * w1);
  const double rho = conc.beta_hat / (w1 * w1);

  dist::MixtureSignalSpec signal({component}, {1.0});
  const double sigma = engine::spurious_sigma(w, Sigma2);
  const double L = engine::population_loss_general(w, signal, Sigma2);
  const double p0 = engine::signal_density_at_zero(w, signal);
  const double dls = engine::dL_dsigma(w, signal, Sigma2);

  const auto constants = kernels::kappa_constants(rho, nu);
  const double loss_lb = kernels::loss_lower_bound(p0, rho, nu);
  const double deriv_lb = kernels::dl_dsigma_lower_bound(p0, sigma, rho, nu);

  const bool hyp1 = L <= constants.kappa_tilde;
  const bool link1 = L >= loss_lb - kSlack;
  const bool link2 = !hyp1 || p0 <= constants.p_star;
  const bool link3 = dls >= deriv_lb && dls > 0.0;

  add_witness(rep, "L", L, 0.0);
  add_witness(rep, "kappa_tilde", constants.kappa_tilde, 0.0);
  add_witness(rep, "log10(L/kappa_tilde)",
              std::log10(L) - std::log10(constants.kappa_tilde), 0.0);
  add_witness(rep, "loss_lower_bound: L - bound", L - loss_lb, 0.0);
  add_witness(rep, "density_cap: p_star - p0", constants.p_star - p0,
              hyp1 ? 0.0 : -std::numeric_limits<double>::infinity());
  add_witness(rep, "derivative_bound: dLdsigma - bound", dls - deriv_lb, 0.0);
  add_witness(rep, "dLdsigma", dls, 0.0);

  if (link1 && link2 && link3) {
    rep.status = CheckStatus::passed;
  } else if (!hyp1) {
    // Outside the lemma's loss regime nothing is promised.
    rep.status = CheckStatus::not_applicable;
  } else {
    rep.status = CheckStatus::failed;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Failure-case reproductions
// ---------------------------------------------------------------------------

namespace {

VerificationReport example1_run(const Mat& Sigma2, int steps, double w1_0,
                                double w2_0, double gamma, bool expect_growth,
                                const char* name) {
  VerificationReport rep;
  rep.check_name = name;
  dist::GaussianTargetSpec spec(Vec::Constant(1, gamma), 1.0, Sigma2);
  engine::PopulationGaussianModel model(spec);
  trainer::TrainerConfig cfg;
  cfg.eta = 0.1;
  cfg.R = 1.0;
  cfg.max_steps = steps;
  cfg.stop_tol = 0.0;  // run all requested steps
  Vec w1 = Vec::Constant(1, w1_0);
  Vec w2 = Vec::Constant(static_cast<int>(Sigma2.rows()), w2_0);
  const auto traj =
      trainer::run_entropy_min(Classifier(w1, w2, 1.0), cfg, model);

  bool ok = true;
  for (std::size_t t = 1; t < traj.records.size(); ++t) {
    const double pre = traj.records[t].norm_w2_pre;
    const double prev = traj.records[t - 1].norm_w2;
    const bool grew = pre > prev;
    if (grew != expect_growth) {
      ok = false;
      add_witness(rep, "step=" + std::to_string(t), pre, prev);
    }
  }
  add_witness(rep, "final_norm_w2", traj.back().norm_w2,
              expect_growth ? traj.records.front().norm_w2 : 0.0);
  rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

}  // namespace

VerificationReport reproduce_example1(const Mat& Sigma2, int steps) {
  // w1 = 0: the signal contributes nothing and the gradient inflates w2.
  return example1_run(Sigma2, steps, 0.0, 0.5, 2.0, /*expect_growth=*/true,
                      "example1_spurious_growth");
}

VerificationReport reproduce_example1_control(const Mat& Sigma2, int steps) {
  // Separated signal, safe-set start: the same code path shrinks w2.
  const double w1 = 1.0 / std::sqrt(1.0 + 0.01 * Sigma2.rows());
  return example1_run(Sigma2, steps, w1, 0.1 * w1, 4.0,
                      /*expect_growth=*/false, "example1_safe_start_control");
}

Example2Quantities example2_quantities(double mu_spike, double minority_mass,
                                       double spike_width) {
  std::vector<dist::LogConcaveComponent> comps;
  std::vector<double> weights;
  if (minority_mass > 0.0) {
    comps = {dist::LogConcaveComponent::gaussian(-mu_spike, spike_width, -1.0),
             dist::LogConcaveComponent::gaussian(0.0, spike_width, 1.0),
             dist::LogConcaveComponent::gaussian(mu_spike, spike_width, 1.0)};
    weights = {0.5 * (1.0 - minority_mass), minority_mass,
               0.5 * (1.0 - minority_mass)};
  } else {
    comps = {dist::LogConcaveComponent::gaussian(-mu_spike, spike_width, -1.0),
             dist::LogConcaveComponent::gaussian(mu_spike, spike_width, 1.0)};
    weights = {0.5, 0.5};
  }
  dist::MixtureSignalSpec signal(std::move(comps), weights);
  const Mat Sigma2 = Mat::Identity(1, 1);
  const Classifier w(Vec::Ones(1), Vec::Constant(1, 0.5), 1.2);
  Example2Quantities out;
  out.loss = engine::population_loss_general(w, signal, Sigma2);
  out.dl_dsigma = engine::dL_dsigma(w, signal, Sigma2);
  return out;
}

VerificationReport reproduce_example2(double mu_spike, double minority_mass,
                                      double spike_width) {
  VerificationReport rep;
  rep.check_name = "example2_small_loss_growth";
  const auto q = example2_quantities(mu_spike, minority_mass, spike_width);
  add_witness(rep, "loss", q.loss, 0.05);
  add_witness(rep, "dL_dsigma", q.dl_dsigma, 0.0);
  rep.status = (q.loss < 0.05 && q.dl_dsigma < 0.0) ? CheckStatus::passed
                                                    : CheckStatus::failed;
  return rep;
}

VerificationReport reproduce_example2_no_minority(double mu_spike) {
  VerificationReport rep;
  rep.check_name = "example2_no_minority_mass";
  const auto q = example2_quantities(mu_spike, 0.0, 0.05);
  add_witness(rep, "dL_dsigma", q.dl_dsigma, 0.0);
  rep.status = q.dl_dsigma > 0.0 ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

VerificationReport reproduce_example2_smooth_control(double mu_spike,
                                                     double minority_mass,
                                                     double spike_width) {
  VerificationReport rep;
  rep.check_name = "example2_log_smooth_control";
  const auto q = example2_quantities(mu_spike, minority_mass, spike_width);
  add_witness(rep, "dL_dsigma", q.dl_dsigma, 0.0);
  rep.status = q.dl_dsigma > 0.0 ? CheckStatus::passed : CheckStatus::failed;
  return rep;
}

// ---------------------------------------------------------------------------
// Finite-sample rate
// ---------------------------------------------------------------------------

double estimate_sample_rate(const std::vector<engine::DeviationRow>& table) {
  std::vector<int> ns;
  for (const auto& row : table)
    if (std::find(ns.begin(), ns.end(), row.n) == ns.end()) ns.push_back(row.n);
  if (ns.size() < 4)
    throw std::invalid_argument(
        "estimate_sample_rate: need at least 4 distinct sample sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& row : table) {
    const double x = std::log(static_cast<double>(row.n));
    const double y = std::log(row.sup_dev);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double vxx = sxx - sx * sx / n;
  if (vxx == 0.0) return 0.0;
  return (sxy - sx * sy / n) / vxx;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

std::vector<VerificationReport> run_kernel_suite() {
  return {verify_q_threshold(),        verify_q_floor(),
          verify_g_bounds(),           verify_backend_agreement(),
          verify_q_finite_difference(), verify_q_sign_change(),
          verify_integral_identities(), verify_kappa_properties()};
}

std::vector<VerificationReport> run_lemma_suite(std::uint64_t seed) {
  std::vector<VerificationReport> out;

  // Safe-set directional derivatives: w1 gains mass, w2 contracts.
  {
    VerificationReport rep;
    rep.check_name = "safe_set_directional_gradients";
    dist::GaussianTargetSpec spec(Vec::Constant(1, 2.5), 0.5,
                                  0.25 * Mat::Identity(2, 2));
    const double a = kernels::r_threshold(spec.sigma_tilde_max());
    CounterRng rng(seed, 21);
    bool ok = true;
    WorstTracker worst;
    int accepted = 0;
    while (accepted < 1000) {
      Vec w(3);
      for (int i = 0; i < 3; ++i) w(i) = rng.normal();
      w = w / w.norm();
      if (w(0) * spec.gamma(0) < a) {
        w(0) = std::fabs(w(0)) + 0.3;
        w = w / w.norm();
        if (w(0) * spec.gamma(0) < a) continue;
      }
      ++accepted;
      const Classifier c = Classifier::from_full(w, 1, 1.0);
      const Vec g = engine::population_grad_gaussian(c, spec);
      const double g1 = g.head(1).dot(c.w1);
      const double g2 = g.tail(2).dot(c.w2);
      worst.update("g1_dot<0", -g1, 0.0);
      if (!(g1 < 0.0)) {
        ok = false;
        add_witness(rep, "g1_dot", g1, 0.0);
      }
      if (c.w2.norm() > 1e-12 && !(g2 > 0.0)) {
        ok = false;
        add_witness(rep, "g2_dot", g2, 0.0);
      }
    }
    rep.witnesses.insert(rep.witnesses.begin(), worst.witness);
    rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
    out.push_back(std::move(rep));
  }

  // Accuracy-to-margin: closed-form accuracy above 1 - rho implies safe-set
  // membership.
  {
    VerificationReport rep;
    rep.check_name = "accuracy_implies_safe_set";
    dist::GaussianTargetSpec spec(Vec::Constant(1, 2.5), 0.5,
                                  0.25 * Mat::Identity(2, 2));
    const double rho = safe_set_error_level(spec, 1.0);
    CounterRng rng(seed, 22);
    bool ok = true;
    for (int k = 0; k < 500; ++k) {
      Vec w(3);
      for (int i = 0; i < 3; ++i) w(i) = rng.normal();
      w = w / w.norm();
      const Classifier c = Classifier::from_full(w, 1, 1.0);
      const double acc = engine::population_accuracy_gaussian(c, spec);
      if (acc >= 1.0 - rho) {
        const auto s = in_safe_set(c, spec, 1.0);
        if (!s.inside) {
          ok = false;
          add_witness(rep, point2("acc", acc, "margin", s.margin), s.margin,
                      0.0);
        }
      }
    }
    if (rep.witnesses.empty())
      add_witness(rep, "error_level_rho", rho, 0.0);
    rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
    out.push_back(std::move(rep));
  }

  // Contraction chain on a separated Gaussian and on the cosine-perturbed
  // component shifted to mean 4.
  {
    auto rep = verify_loss_thresholds(
        dist::LogConcaveComponent::gaussian(30.0, 1.0, 1.0),
        Classifier(Vec::Ones(1), Vec::Constant(1, 0.1), 1.1),
        Mat::Identity(1, 1));
    rep.check_name = "loss_threshold_chain_gaussian";
    out.push_back(std::move(rep));
  }
  {
    auto comp = dist::LogConcaveComponent::make(
        [](double x) { return -(x - 4.0) * (x - 4.0) + std::cos(x - 4.0); },
        [](double x) { return -2.0 * (x - 4.0) - std::sin(x - 4.0); },
        [](double x) { return -2.0 - std::cos(x - 4.0); }, 1.0, -6.0, 14.0);
    auto rep = verify_loss_thresholds(
        comp, Classifier(Vec::Ones(1), Vec::Constant(1, 0.1), 1.1),
        Mat::Identity(1, 1));
    rep.check_name = "loss_threshold_chain_cosine";
    out.push_back(std::move(rep));
  }

  // Separation assumption: strongly separated Gaussian pair passes, fully
  // overlapping classes are rejected.
  {
    dist::MixtureSignalSpec sep(
        {dist::LogConcaveComponent::gaussian(30.0, 1.0, 1.0),
         dist::LogConcaveComponent::gaussian(-30.0, 1.0, -1.0)},
        {0.5, 0.5});
    auto rep = check_separation(sep, 1.0, 1.0);
    rep.check_name = "separation_strongly_separated";
    out.push_back(std::move(rep));
  }
  {
    dist::MixtureSignalSpec overlap(
        {dist::LogConcaveComponent::gaussian(0.0, 1.0, 1.0),
         dist::LogConcaveComponent::gaussian(0.0, 1.0, -1.0)},
        {0.5, 0.5});
    auto inner = check_separation(overlap, 1.0, 1.0);
    VerificationReport rep;
    rep.check_name = "separation_rejects_overlap";
    rep.status = inner.status == CheckStatus::failed ? CheckStatus::passed
                                                     : CheckStatus::failed;
    rep.witnesses = inner.witnesses;
    out.push_back(std::move(rep));
  }

  // Initialization assumption on a classifier that honestly satisfies it.
  {
    dist::GaussianTargetSpec spec(Vec::Constant(1, 30.0), 1.0,
                                  Mat::Identity(1, 1));
    const Classifier ws(Vec::Constant(1, 0.995), Vec::Constant(1, 0.0995),
                        1.0);
    const double L = engine::population_loss_gaussian(ws, spec);
    auto rep = check_init(ws, spec.Sigma2, 1.0, 1.0, L, 0.5);
    rep.check_name = "init_assumption_satisfied";
    out.push_back(std::move(rep));
  }

  // Monotone invariants along a safe-set population run.
  {
    VerificationReport rep;
    rep.check_name = "monotone_invariants";
    rep.tolerance = kSlack;
    dist::GaussianTargetSpec spec(Vec::Constant(1, 2.5), 0.5,
                                  0.25 * Mat::Identity(2, 2));
    engine::PopulationGaussianModel model(spec);
    trainer::TrainerConfig cfg;
    cfg.eta = 0.3;
    cfg.max_steps = 600;
    cfg.stop_tol = 1e-9;
    Vec w0(3);
    w0 << 0.62, 0.61, 0.49;
    w0 /= w0.norm();
    const auto traj =
        trainer::run_entropy_min(Classifier::from_full(w0, 1, 1.0), cfg, model);
    bool ok = true;
    for (std::size_t t = 1; t < traj.records.size(); ++t) {
      const auto& prev = traj.records[t - 1];
      const auto& cur = traj.records[t];
      if (cur.norm_w1 < prev.norm_w1 - kSlack ||
          cur.sigma > prev.sigma + kSlack || cur.loss > prev.loss + kSlack) {
        ok = false;
        add_witness(rep, "step=" + std::to_string(t), cur.loss, prev.loss);
      }
    }
    if (rep.witnesses.empty())
      add_witness(rep, "steps_checked",
                  static_cast<double>(traj.records.size() - 1), 1.0);
    rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
    out.push_back(std::move(rep));
  }

  // Geometric decay with a fitted rate that is stable across starts.
  {
    VerificationReport rep;
    rep.check_name = "geometric_decay_stability";
    dist::GaussianTargetSpec spec(Vec::Constant(1, 2.5), 0.5,
                                  0.25 * Mat::Identity(2, 2));
    engine::PopulationGaussianModel model(spec);
    CounterRng rng(seed, 23);
    std::vector<double> rates;
    bool ok = true;
    for (int s = 0; s < 10; ++s) {
      Vec w0(3);
      w0(0) = 0.62 + 0.3 * rng.uniform();
      w0(1) = rng.normal();
      w0(2) = rng.normal();
      w0.tail(2) *= 0.6 / w0.tail(2).norm();
      w0 /= w0.norm();
      trainer::TrainerConfig cfg;
      cfg.eta = 0.3;
      cfg.max_steps = 1200;
      cfg.stop_tol = 1e-7;
      const auto traj = trainer::run_entropy_min(
          Classifier::from_full(w0, 1, 1.0), cfg, model);
      for (std::size_t t = 1; t < traj.records.size(); ++t) {
        const double ratio =
            traj.records[t].norm_w2 / traj.records[t - 1].norm_w2;
        if (!(ratio < 1.0)) {
          ok = false;
          add_witness(rep, "ratio@step=" + std::to_string(t), ratio, 1.0);
        }
      }
      const auto fit = trainer::fit_w2_decay(traj, 1e-6, 1e-1);
      rates.push_back(std::exp(fit.slope));
    }
    const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
    add_witness(rep, point2("rate_min", *lo, "rate_max", *hi), *hi - *lo,
                0.05);
    if (*hi - *lo > 0.05 || *hi >= 1.0) ok = false;
    rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
    out.push_back(std::move(rep));
  }

  return out;
}

std::vector<VerificationReport> run_example_suite() {
  const Mat s1 = Mat::Identity(1, 1);
  return {reproduce_example1(s1, 100), reproduce_example1_control(s1, 100),
          reproduce_example2(), reproduce_example2_no_minority(),
          reproduce_example2_smooth_control()};
}

std::vector<VerificationReport> run_finite_sample_suite(std::uint64_t seed) {
  std::vector<VerificationReport> out;
  dist::GaussianTargetSpec spec(Vec::Constant(1, 2.0), 1.0,
                                Mat::Identity(2, 2));
  CounterRng rng(seed, 24);
  std::vector<Classifier> grid;
  for (int k = 0; k < 8; ++k) {
    Vec w(3);
    for (int i = 0; i < 3; ++i) w(i) = rng.normal();
    w /= w.norm();
    grid.push_back(Classifier::from_full(w, 1, 1.0));
  }
  const std::vector<int> ns = {1000, 3162, 10000, 31623, 100000};
  const auto table = engine::grad_deviation(spec, ns, 8, grid, seed);

  {
    VerificationReport rep;
    rep.check_name = "deviation_rate_slope";
    const double slope = estimate_sample_rate(table);
    add_witness(rep, "log-log slope", slope, -0.65);
    rep.status = (slope >= -0.65 && slope <= -0.35) ? CheckStatus::passed
                                                    : CheckStatus::failed;
    out.push_back(std::move(rep));
  }
  {
    VerificationReport rep;
    rep.check_name = "deviation_monotone_in_n";
    bool ok = true;
    double prev = std::numeric_limits<double>::infinity();
    for (int n : ns) {
      double mean = 0.0;
      int cnt = 0;
      for (const auto& row : table)
        if (row.n == n) {
          mean += row.sup_dev;
          ++cnt;
        }
      mean /= cnt;
      if (mean > prev) {
        ok = false;
        add_witness(rep, "n=" + std::to_string(n), mean, prev);
      }
      prev = mean;
    }
    if (rep.witnesses.empty()) add_witness(rep, "means decreasing", 1.0, 1.0);
    rep.status = ok ? CheckStatus::passed : CheckStatus::failed;
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace spurlab::verify
