#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spurlab/distributions.hpp"
#include "spurlab/loss_engine.hpp"

namespace spurlab::verify {

using engine::Classifier;
using engine::Mat;
using engine::Vec;

enum class CheckStatus { passed, failed, not_applicable };

const char* to_string(CheckStatus s);

struct Witness {
  std::string point;
  double measured = 0.0;
  double required = 0.0;
};

struct VerificationReport {
  std::string check_name;
  CheckStatus status = CheckStatus::passed;
  std::vector<Witness> witnesses;  // nonempty whenever status == failed
  double tolerance = 0.0;

  bool passed() const { return status != CheckStatus::failed; }
  // Witness with the smallest measured-minus-required margin.
  const Witness* worst_witness() const;
  std::string summary_line() const;  // name,status,worst_witness,tolerance
};

// ---------------------------------------------------------------------------
// Assumption checkers
// ---------------------------------------------------------------------------

// Minimizes L((w1, 0)) over |w1| <= 1 by golden-section search (both sign
// branches); passes iff the minimum is at most tau_min * kappa(beta, alpha).
// The log10 loss-to-threshold ratio is always recorded, since the threshold
// constants are conservative enough to be astronomically small.
VerificationReport check_separation(const dist::MixtureSignalSpec& signal,
                                    double alpha, double beta);

// Source-classifier conditions: |w1| >= 1/2; spurious variance
// w2' Sigma2 w2 below the 0.03 * min{1, alpha/beta^2, 1/beta, 1/(beta |log beta|)}
// cap; loss at most tau_min * kappa(beta, alpha).
VerificationReport check_init(const Classifier& w_s, const Mat& Sigma2,
                              double alpha, double beta, double L_ws,
                              double tau_min);

// Safe-set membership: w1'gamma >= a with a = r(R sigma_tilde_max) and
// |w| <= R. d1 must be 1.
struct SafeSetResult {
  bool inside = false;
  double margin = 0.0;     // w1'gamma - a
  double threshold_a = 0.0;
};
SafeSetResult in_safe_set(const Classifier& w,
                          const dist::GaussianTargetSpec& spec, double R);

// The 0-1 error level below which membership in the safe set is implied.
double safe_set_error_level(const dist::GaussianTargetSpec& spec, double R);

// ---------------------------------------------------------------------------
// Lemma grid certificates
// ---------------------------------------------------------------------------

struct GridSpec {
  double sigma_lo = 0.05;
  double sigma_hi = 5.0;
  double sigma_step = 0.05;
  double mu_extent = 20.0;
  double mu_step = 0.05;
};

// q_sigma(mu) >= sigma/4 * loss_exp(mu) for mu in [r(sigma), r(sigma)+extent],
// slack 1e-10.
VerificationReport verify_q_threshold(const GridSpec& grid = {});

// q_sigma(mu) >= -sqrt(2/pi) exp(-mu^2/(2 sigma^2)), same sigma grid,
// mu in [0, 30].
VerificationReport verify_q_floor(const GridSpec& grid = {});

// g_sigma >= 0.25 loss_exp for sigma <= 1; g_sigma <= 2 loss_exp for
// sigma <= 1/2.
VerificationReport verify_g_bounds(const GridSpec& grid = {});

// Closed form vs quadrature backend, absolute 1e-8 on the grid.
VerificationReport verify_backend_agreement(const GridSpec& grid = {});

// q_sigma vs central finite difference of g_sigma (h = 1e-5), 1e-6.
VerificationReport verify_q_finite_difference(const GridSpec& grid = {});

// q_sigma(0) < 0 < q_sigma(r(sigma)+eps) and the located root never exceeds
// r(sigma).
VerificationReport verify_q_sign_change(const GridSpec& grid = {});

// int exp(ax - bx^2/2) closed forms (full line and half line) vs adaptive
// quadrature, 1e-9, over (a, b) in {-2, 0, 2} x {0.5, 1, 2}.
VerificationReport verify_integral_identities();

// kappa(beta, alpha) <= kappa_tilde(beta, alpha); kappa_tilde non-increasing
// in rho on rho in [nu, 10 nu].
VerificationReport verify_kappa_properties();

// ---------------------------------------------------------------------------
// Contraction-chain certificate (general signal, K = 1)
// ---------------------------------------------------------------------------
//
// Measures L, p(0), dL/dsigma for the given component and classifier and
// checks the chain
//
//   L <= kappa_tilde  ==>  p(0) <= p_star  ==>  dL/dsigma >= B(p(0), sigma)
//
// together with the loss lower bound L >= B_loss(p(0)). Implications with a
// false hypothesis are vacuous; the report still requires the final
// derivative bound to hold outright and fails only on a genuine
// counterexample (hypothesis true, conclusion false). When the derivative
// bound itself fails outside the hypothesis regime the result is
// not_applicable.
VerificationReport verify_loss_thresholds(
    const dist::LogConcaveComponent& component, const Classifier& w,
    const Mat& Sigma2);

// ---------------------------------------------------------------------------
// Failure-case reproductions
// ---------------------------------------------------------------------------

// From w0 = (0, 0.5) every gradient step must grow the spurious norm before
// projection: |w2_pre(t)| > |w2(t-1)| for t = 1..steps.
VerificationReport reproduce_example1(const Mat& Sigma2, int steps);

// Same trainer path started from a separated, safe-set initialization; the
// spurious norm must shrink instead.
VerificationReport reproduce_example1_control(const Mat& Sigma2, int steps);

// Three-spike signal (masses (1-m)/2, m, (1-m)/2 at +-mu_spike and 0, spike
// std spike_width) evaluated at w = (1, w2) with spurious sigma 0.5:
// passes iff L < 0.05 and dL/dsigma < 0.
VerificationReport reproduce_example2(double mu_spike = 15.0,
                                      double minority_mass = 0.05,
                                      double spike_width = 0.05);

// minority_mass = 0 removes the bad mass: dL/dsigma must turn positive.
VerificationReport reproduce_example2_no_minority(double mu_spike = 15.0);

// Widening every spike (default std 8) restores log-smoothness and must also
// flip dL/dsigma positive.
VerificationReport reproduce_example2_smooth_control(double mu_spike = 15.0,
                                                     double minority_mass = 0.05,
                                                     double spike_width = 8.0);

// Raw quantities behind the example-2 reports.
struct Example2Quantities {
  double loss = 0.0;
  double dl_dsigma = 0.0;
};
Example2Quantities example2_quantities(double mu_spike, double minority_mass,
                                       double spike_width);

// ---------------------------------------------------------------------------
// Finite-sample rate
// ---------------------------------------------------------------------------

// Least-squares slope of log(sup_dev) against log(n). Throws unless the
// table covers at least 4 distinct sample sizes.
double estimate_sample_rate(const std::vector<engine::DeviationRow>& table);

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

std::vector<VerificationReport> run_kernel_suite();
std::vector<VerificationReport> run_lemma_suite(std::uint64_t seed = 1);
std::vector<VerificationReport> run_example_suite();
std::vector<VerificationReport> run_finite_sample_suite(std::uint64_t seed = 1);

}  // namespace spurlab::verify
