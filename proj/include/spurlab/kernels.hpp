#pragma once

#include <functional>
#include <vector>

namespace spurlab::kernels {

// ---------------------------------------------------------------------------
// Surrogate losses
// ---------------------------------------------------------------------------

// Confidence loss exp(-|t|). Range (0, 1].
double loss_exp(double t);

// Derivative of loss_exp; the kink at 0 is resolved with the midpoint
// subgradient value 0.
double loss_exp_deriv(double t);

// Binary entropy (nats) of the sigmoid of t. Symmetric, maximal ln 2 at 0,
// underflows gracefully for large |t| (no NaN, no overflow).
double loss_ent(double t);

// d/dt loss_ent(t) = -t * sigmoid(t) * (1 - sigmoid(t)).
double loss_ent_deriv(double t);

// ---------------------------------------------------------------------------
// Gaussian-smoothed loss g_sigma and its sigma-derivative q_sigma
// ---------------------------------------------------------------------------
//
// g_sigma(mu) = E_{z ~ N(0, sigma^2)}[ loss_exp(mu + z) ]. Closed form:
//
//   g_sigma(mu) = 1/2 exp(sigma^2/2) [ exp(mu)  erfc(sigma/sqrt2 + mu/(sqrt2 sigma))
//                                    + exp(-mu) erfc(sigma/sqrt2 - mu/(sqrt2 sigma)) ]
//
// evaluated through erfcx so no intermediate overflows. q_sigma(mu) is the
// sigma-derivative, which collapses to
//
//   q_sigma(mu) = sigma * g_sigma(mu) - sqrt(2/pi) exp(-mu^2 / (2 sigma^2)).

double g_sigma(double mu, double sigma);

// Requires sigma > 0.
double q_sigma(double mu, double sigma);

// d/dmu g_sigma(mu); odd in mu. At sigma = 0 this is loss_exp_deriv.
double g_sigma_dmu(double mu, double sigma);

// The negative envelope term sqrt(2/pi) exp(-mu^2/(2 sigma^2)); q_sigma is
// never below its negation.
double q_sigma_floor(double mu, double sigma);

// Smallest positive root of mu -> q_sigma(mu, sigma) (the margin above which
// increasing sigma starts hurting the loss). Always below r_threshold(sigma).
double q_sigma_root(double sigma);

// Backend selector for the smoothed loss. The closed form is the production
// path; the quadrature path exists as an independent oracle.
enum class SmoothedLossBackend { closed_form, quadrature };

struct SmoothedLoss {
  SmoothedLossBackend backend = SmoothedLossBackend::closed_form;
  int quadrature_nodes = 96;

  double value(double mu, double sigma) const;
};

// Quadrature evaluation of g_sigma. Uses Gauss-Hermite when the kink of
// loss_exp lies outside the +-12 sigma window covered by the nodes, and an
// adaptive Simpson rule split exactly at the kink otherwise (Gauss-Hermite
// loses several digits when a node interval straddles the kink).
double g_sigma_quadrature(double mu, double sigma, int nodes = 96);

// ---------------------------------------------------------------------------
// Margin threshold r(sigma)
// ---------------------------------------------------------------------------
//
//   r(sigma) = sigma^2 + sigma sqrt(2 log(4 sqrt2 / (sqrt(pi) sigma)))   sigma <= 4 sqrt2/sqrt(pi)
//            = 2 sigma^2                                                 otherwise
//
// For |mu| >= r(sigma), q_sigma(mu) >= sigma/4 * loss_exp(mu). The two
// branches do not meet at the breakpoint (the left branch equals sigma^2
// there); the jump is deliberate and reported, not smoothed.

double r_threshold(double sigma);
double r_threshold_breakpoint();  // 4 sqrt(2) / sqrt(pi)
double r_threshold_jump();        // right-branch minus left-branch value there

// ---------------------------------------------------------------------------
// Contraction-regime constants
// ---------------------------------------------------------------------------
//
// For a density that is nu-log-concave and rho-log-smooth (rho >= nu > 0):
//
//   p_star(rho, nu) = sqrt(nu)/(2 sqrt(pi)) *
//                     min{ 1, sqrt(nu/rho) (sqrt(pi) / (44 sqrt(2 rho)))^(8 rho / nu) }
//
//   kappa_tilde(rho, nu) =
//     min{ sqrt(pi)/(4 sqrt(rho)) p_star^(1 - nu/(4 rho)) (nu/(2 sqrt(pi)))^(nu/(4 rho)),
//          sqrt(nu)/(8 sqrt(2 pi)(sqrt(rho) + sqrt(2))) exp(-((sqrt(rho)+4)/(2 sqrt(nu)))^2) }
//
// These constants are extremely conservative; callers should expect
// astronomically small values for rho/nu away from 1 and compare in log space
// when needed.

struct ThresholdConstants {
  double rho = 0.0;
  double nu = 0.0;
  double kappa_tilde = 0.0;
  double p_star = 0.0;
};

// Throws std::invalid_argument unless rho >= nu > 0.
ThresholdConstants kappa_constants(double rho, double nu);

// kappa(beta, alpha) = min over a in [1,4] of kappa_tilde(a beta, a alpha),
// located on a 256-point grid refined by golden-section search (tol 1e-10).
double kappa_min(double beta, double alpha);

// Lower bound on dL/dsigma once the density at zero is known:
//   sigma * p0^(1 - nu/(4 rho)) * sqrt(pi)/(22 sqrt(rho)) * (sqrt(nu)/(2 sqrt(pi)))^(nu/(4 rho))
double dl_dsigma_lower_bound(double p0, double sigma, double rho, double nu);

// Loss lower bound in terms of the density at zero:
//   sqrt(pi)/(4 sqrt(rho)) * p0^(1 - nu/(4 rho)) * (sqrt(nu)/(2 sqrt(pi)))^(nu/(4 rho))
double loss_lower_bound(double p0, double rho, double nu);

// ---------------------------------------------------------------------------
// Quadrature utilities
// ---------------------------------------------------------------------------

// Gauss-Hermite nodes/weights for integration against exp(-x^2) (physicists'
// convention). Cached per node count; thread-safe.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussHermiteRule& gauss_hermite(int n);

// E_{z ~ N(mu, sigma^2)}[ f(z) ] by Gauss-Hermite; f(mu) when sigma = 0.
double gh_expectation(const std::function<double(double)>& f, double mu,
                      double sigma, int nodes = 96);

// Adaptive Simpson on [a, b] with absolute tolerance tol. Throws
// std::runtime_error if the recursion exceeds max_depth without converging.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12, int max_depth = 60);

// Closed forms for int exp(a x - b x^2 / 2) dx over the whole line and over
// [0, inf); b > 0.
double integral_exp_quadratic_full(double a, double b);
double integral_exp_quadratic_half(double a, double b);

}  // namespace spurlab::kernels
