#include "spurlab/kernels.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

#include "spurlab/special_functions.hpp"

namespace spurlab::kernels {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kSqrtPi = 1.77245385090551602730;
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

inline double sq(double x) { return x * x; }

}  // namespace

double loss_exp(double t) { return std::exp(-std::fabs(t)); }

double loss_exp_deriv(double t) {
  if (t == 0.0) return 0.0;
  return (t > 0.0) ? -std::exp(-t) : std::exp(t);
}

double loss_ent(double t) {
  const double a = std::fabs(t);
  const double u = std::exp(-a);       // in (0, 1]
  const double lg = std::log1p(u);     // log(1 + u)
  const double p = u / (1.0 + u);      // smaller sigmoid branch
  // H = -p log p - (1-p) log(1-p) with log p = -a - log1p(u),
  // log(1-p) = -log1p(u).
  return p * (a + lg) + lg / (1.0 + u);
}

double loss_ent_deriv(double t) {
  const double a = std::fabs(t);
  const double u = std::exp(-a);
  const double s1ms = u / sq(1.0 + u);  // sigmoid(t) * (1 - sigmoid(t))
  return -t * s1ms;
}

// ---------------------------------------------------------------------------
// g_sigma / q_sigma closed forms
// ---------------------------------------------------------------------------

double g_sigma(double mu, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("g_sigma: sigma must be >= 0");
  if (sigma == 0.0) return loss_exp(mu);
  const double m = std::fabs(mu);  // g is even in mu
  const double a = (sigma * sigma + m) / (kSqrt2 * sigma);  // always >= 0
  const double b = (sigma * sigma - m) / (kSqrt2 * sigma);
  const double core = std::exp(-sq(m / sigma) / 2.0);
  double total = 0.5 * core * erfcx(a);
  if (b >= 0.0) {
    total += 0.5 * core * erfcx(b);
  } else {
    // erfc(b) = 2 - erfc(-b); the unscaled term exp(sigma^2/2 - m) is
    // bounded by exp(-sigma^2/2) here because b < 0 means m > sigma^2.
    total += std::exp(sigma * sigma / 2.0 - m) - 0.5 * core * erfcx(-b);
  }
  return total;
}

double q_sigma(double mu, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("q_sigma: sigma must be > 0");
  return sigma * g_sigma(mu, sigma) - q_sigma_floor(mu, sigma);
}

double g_sigma_dmu(double mu, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("g_sigma_dmu: sigma < 0");
  if (sigma == 0.0) return loss_exp_deriv(mu);
  const double m = std::fabs(mu);
  const double a = (sigma * sigma + m) / (kSqrt2 * sigma);
  const double b = (sigma * sigma - m) / (kSqrt2 * sigma);
  const double core = std::exp(-sq(m / sigma) / 2.0);
  // Odd part: 1/2 e^{s^2/2} [ e^{m} erfc(a) - e^{-m} erfc(b) ] for m >= 0.
  double val = 0.5 * core * erfcx(a);
  if (b >= 0.0) {
    val -= 0.5 * core * erfcx(b);
  } else {
    val -= std::exp(sigma * sigma / 2.0 - m) - 0.5 * core * erfcx(-b);
  }
  return (mu >= 0.0) ? val : -val;
}

double q_sigma_floor(double mu, double sigma) {
  return kSqrt2OverPi * std::exp(-sq(mu / sigma) / 2.0);
}

double q_sigma_root(double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("q_sigma_root: sigma <= 0");
  double lo = 0.0;                   // q < 0 here
  double hi = r_threshold(sigma);    // q >= sigma/4 loss_exp > 0 here
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (q_sigma(mid, sigma) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Quadrature backend
// ---------------------------------------------------------------------------

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol, int max_depth) {
  struct Impl {
    const std::function<double(double)>& f;
    int max_depth;
    double run(double a, double fa, double b, double fb, double m, double fm,
               double whole, double tol, int depth) const {
      const double lm = 0.5 * (a + m);
      const double rm = 0.5 * (m + b);
      const double flm = f(lm);
      const double frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
      if (depth >= max_depth)
        throw std::runtime_error(
            "adaptive_simpson: no convergence on [" + std::to_string(a) +
            ", " + std::to_string(b) + "]");
      return run(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
             run(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
    }
  };
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Impl{f, max_depth}.run(a, fa, b, fb, m, fm, whole, tol, 0);
}

const GaussHermiteRule& gauss_hermite(int n) {
  static std::mutex mtx;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");

  // Newton iteration on the physicists' Hermite recurrence.
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * rule.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * rule.nodes[1];
    else
      z = 2.0 * z - rule.nodes[i - 2];

    double pp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 -
             std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) <= 1e-15) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

double gh_expectation(const std::function<double(double)>& f, double mu,
                      double sigma, int nodes) {
  if (nodes < 8)
    throw std::invalid_argument("gh_expectation: need at least 8 nodes");
  if (sigma == 0.0) return f(mu);
  const GaussHermiteRule& rule = gauss_hermite(nodes);
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i)
    sum += rule.weights[i] * f(mu + kSqrt2 * sigma * rule.nodes[i]);
  return sum / kSqrtPi;
}

double g_sigma_quadrature(double mu, double sigma, int nodes) {
  if (sigma == 0.0) return loss_exp(mu);
  const double kink = -mu / sigma;  // standardized location of the |.| kink
  if (std::fabs(kink) >= 12.0) {
    return gh_expectation([](double z) { return loss_exp(z); }, mu, sigma,
                          nodes);
  }
  // Split at the kink; both pieces are analytic. Mass beyond 12 standard
  // deviations is below 2e-33 and the integrand is bounded by 1.
  const auto integrand = [mu, sigma](double z) {
    return loss_exp(mu + sigma * z) *
           std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
  };
  return adaptive_simpson(integrand, -12.0, kink, 5e-13) +
         adaptive_simpson(integrand, kink, 12.0, 5e-13);
}

double SmoothedLoss::value(double mu, double sigma) const {
  return backend == SmoothedLossBackend::closed_form
             ? g_sigma(mu, sigma)
             : g_sigma_quadrature(mu, sigma, quadrature_nodes);
}

// ---------------------------------------------------------------------------
// r(sigma)
// ---------------------------------------------------------------------------

double r_threshold_breakpoint() { return 4.0 * kSqrt2 / kSqrtPi; }

double r_threshold(double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("r_threshold: sigma <= 0");
  const double brk = r_threshold_breakpoint();
  if (sigma <= brk)
    return sigma * sigma + sigma * std::sqrt(2.0 * std::log(brk / sigma));
  return 2.0 * sigma * sigma;
}

double r_threshold_jump() {
  // Left branch at the breakpoint is sigma^2 (the log term vanishes), right
  // branch is 2 sigma^2.
  const double brk = r_threshold_breakpoint();
  return brk * brk;
}

// ---------------------------------------------------------------------------
// kappa_tilde / p_star
// ---------------------------------------------------------------------------

ThresholdConstants kappa_constants(double rho, double nu) {
  if (!(nu > 0.0) || rho < nu)
    throw std::invalid_argument(
        "kappa_constants: requires rho >= nu > 0 (log-smoothness dominates "
        "log-concavity)");
  ThresholdConstants out;
  out.rho = rho;
  out.nu = nu;
  const double sr = std::sqrt(rho);
  const double sn = std::sqrt(nu);
  out.p_star =
      sn / (2.0 * kSqrtPi) *
      std::min(1.0, (sn / sr) * std::pow(kSqrtPi / (44.0 * std::sqrt(2.0 * rho)),
                                         8.0 * rho / nu));
  const double expo = nu / (4.0 * rho);
  const double branch1 = kSqrtPi / (4.0 * sr) *
                         std::pow(out.p_star, 1.0 - expo) *
                         std::pow(nu / (2.0 * kSqrtPi), expo);
  const double branch2 = sn / (8.0 * std::sqrt(2.0 * kPi) * (sr + kSqrt2)) *
                         std::exp(-sq((sr + 4.0) / (2.0 * sn)));
  out.kappa_tilde = std::min(branch1, branch2);
  return out;
}

double kappa_min(double beta, double alpha) {
  const auto f = [&](double a) {
    return kappa_constants(a * beta, a * alpha).kappa_tilde;
  };
  // 256-point grid sweep.
  constexpr int kGrid = 256;
  double best_a = 1.0;
  double best = f(1.0);
  for (int i = 1; i < kGrid; ++i) {
    const double a = 1.0 + 3.0 * i / (kGrid - 1.0);
    const double v = f(a);
    if (v < best) {
      best = v;
      best_a = a;
    }
  }
  // Golden-section refinement around the grid minimum.
  const double step = 3.0 / (kGrid - 1.0);
  double lo = std::max(1.0, best_a - step);
  double hi = std::min(4.0, best_a + step);
  const double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo);
  double x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > 1e-10) {
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
  return std::min(best, std::min(f1, f2));
}

double loss_lower_bound(double p0, double rho, double nu) {
  const double expo = nu / (4.0 * rho);
  return kSqrtPi / (4.0 * std::sqrt(rho)) * std::pow(p0, 1.0 - expo) *
         std::pow(std::sqrt(nu) / (2.0 * kSqrtPi), expo);
}

double dl_dsigma_lower_bound(double p0, double sigma, double rho, double nu) {
  const double expo = nu / (4.0 * rho);
  return sigma * std::pow(p0, 1.0 - expo) * kSqrtPi / (22.0 * std::sqrt(rho)) *
         std::pow(std::sqrt(nu) / (2.0 * kSqrtPi), expo);
}

// ---------------------------------------------------------------------------
// Gaussian integral identities
// ---------------------------------------------------------------------------

double integral_exp_quadratic_full(double a, double b) {
  if (b <= 0.0) throw std::invalid_argument("integral: b must be > 0");
  return std::sqrt(2.0 * kPi) * std::exp(a * a / (2.0 * b)) / std::sqrt(b);
}

double integral_exp_quadratic_half(double a, double b) {
  if (b <= 0.0) throw std::invalid_argument("integral: b must be > 0");
  return kSqrtPi * std::exp(a * a / (2.0 * b)) *
         (erf(a / std::sqrt(2.0 * b)) + 1.0) / std::sqrt(2.0 * b);
}

}  // namespace spurlab::kernels
