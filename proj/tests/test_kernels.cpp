#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "spurlab/kernels.hpp"
#include "spurlab/rng.hpp"

namespace k = spurlab::kernels;

TEST_CASE("loss_exp basics") {
  CHECK(k::loss_exp(0.0) == 1.0);
  CHECK(k::loss_exp(-3.0) == k::loss_exp(3.0));
  CHECK(k::loss_exp(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-16));
  CHECK(k::loss_exp_deriv(0.0) == 0.0);
  CHECK(k::loss_exp_deriv(2.0) == doctest::Approx(-std::exp(-2.0)));
  CHECK(k::loss_exp_deriv(-2.0) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("loss_ent value, symmetry, tails") {
  CHECK(k::loss_ent(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(k::loss_ent(5.0) == doctest::Approx(k::loss_ent(-5.0)).epsilon(1e-15));
  // Maximal at 0.
  CHECK(k::loss_ent(0.0) > k::loss_ent(0.1));
  // Deep tail: tiny, finite, not NaN.
  const double tail = k::loss_ent(40.0);
  CHECK(std::isfinite(tail));
  CHECK(tail < 1e-15);
  CHECK(tail > 0.0);
  CHECK(std::isfinite(k::loss_ent(800.0)));
  // Derivative: smooth at zero, matches finite differences.
  CHECK(k::loss_ent_deriv(0.0) == 0.0);
  for (double t : {-4.0, -0.7, 0.3, 2.0, 11.0}) {
    const double h = 1e-6;
    const double fd = (k::loss_ent(t + h) - k::loss_ent(t - h)) / (2.0 * h);
    CHECK(k::loss_ent_deriv(t) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("loss_ent is within a constant factor of loss_exp on [-10, 10]") {
  double lo = 1e300, hi = 0.0;
  for (double t = -10.0; t <= 10.0 + 1e-12; t += 0.01) {
    const double ratio = k::loss_ent(t) / k::loss_exp(t);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo == doctest::Approx(std::log(2.0)).epsilon(1e-9));  // at t = 0
  CHECK(hi / lo <= 16.0);  // some c has ratio/c within [1/4, 4]
}

TEST_CASE("g_sigma closed form against quadrature oracle") {
  // Frozen spot value: the sigma = 0 case collapses to loss_exp.
  CHECK(k::g_sigma(5.0, 0.0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-16));
  // Symmetry.
  for (double mu : {0.3, 1.0, 7.0, 25.0})
    for (double sigma : {0.01, 0.5, 2.0, 9.0})
      CHECK(k::g_sigma(mu, sigma) ==
            doctest::Approx(k::g_sigma(-mu, sigma)).epsilon(1e-15));
  // Quadrature agreement across the documented envelope.
  for (double sigma : {1e-3, 0.05, 0.3, 1.0, 2.5, 5.0, 10.0}) {
    for (double mu : {0.0, 0.5, 2.0, 10.0, 30.0}) {
      const double closed = k::g_sigma(mu, sigma);
      const double quad = k::g_sigma_quadrature(mu, sigma, 96);
      CHECK(std::fabs(closed - quad) <= 1e-8);
    }
  }
  // The specific point mu = 2, sigma = 1.
  CHECK(std::fabs(k::g_sigma(2.0, 1.0) - k::g_sigma_quadrature(2.0, 1.0, 96)) <=
        1e-8);
}

TEST_CASE("g_sigma stays bounded and overflow-free at extreme margins") {
  const double v = k::g_sigma(700.0, 1e-2);
  CHECK(std::isfinite(v));
  CHECK(v >= 0.0);
  CHECK(std::isfinite(k::g_sigma(0.0, 50.0)));
  CHECK(std::isfinite(k::q_sigma(700.0, 1e-2)));
}

TEST_CASE("q_sigma matches central finite differences of g_sigma") {
  const double h = 1e-5;
  for (double sigma : {0.1, 0.5, 1.0, 3.0}) {
    for (double mu : {0.0, 0.5, 3.0, 10.0}) {
      const double fd =
          (k::g_sigma(mu, sigma + h) - k::g_sigma(mu, sigma - h)) / (2.0 * h);
      CHECK(std::fabs(k::q_sigma(mu, sigma) - fd) <= 1e-6);
    }
  }
}

TEST_CASE("q_sigma signs") {
  // Negative at zero margin for every sigma; symmetric in mu.
  for (double sigma : {0.1, 0.5, 1.0, 2.0, 8.0}) {
    CHECK(k::q_sigma(0.0, sigma) < 0.0);
    CHECK(k::q_sigma(3.0, sigma) ==
          doctest::Approx(k::q_sigma(-3.0, sigma)).epsilon(1e-14));
  }
  CHECK(k::q_sigma(0.0, 0.5) == doctest::Approx(-0.448265726082).epsilon(1e-9));
  // Positive beyond the threshold, and the root sits below it.
  for (double sigma : {0.1, 0.7, 2.0, 4.0}) {
    const double r = k::r_threshold(sigma);
    CHECK(k::q_sigma(r + 1e-9, sigma) > 0.0);
    const double root = k::q_sigma_root(sigma);
    CHECK(root < r);
    CHECK(std::fabs(k::q_sigma(root, sigma)) < 1e-10);
  }
}

TEST_CASE("g_sigma_dmu is the mu-derivative") {
  const double h = 1e-6;
  for (double sigma : {0.3, 1.0, 2.0}) {
    for (double mu : {-4.0, -0.5, 0.5, 2.0, 12.0}) {
      const double fd =
          (k::g_sigma(mu + h, sigma) - k::g_sigma(mu - h, sigma)) / (2.0 * h);
      CHECK(k::g_sigma_dmu(mu, sigma) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(k::g_sigma_dmu(1.5, sigma) ==
          doctest::Approx(-k::g_sigma_dmu(-1.5, sigma)).epsilon(1e-13));
  }
}

TEST_CASE("r_threshold branches and breakpoint jump") {
  const double brk = k::r_threshold_breakpoint();
  CHECK(brk == doctest::Approx(4.0 * std::sqrt(2.0) / std::sqrt(M_PI))
                   .epsilon(1e-15));
  CHECK(k::r_threshold(4.0) == doctest::Approx(32.0).epsilon(1e-15));
  // At the breakpoint the left branch reduces to sigma^2.
  CHECK(k::r_threshold(brk) == doctest::Approx(brk * brk).epsilon(1e-12));
  CHECK(k::r_threshold_jump() == doctest::Approx(brk * brk).epsilon(1e-12));
  const double s = 0.1;
  const double expect =
      s * s + s * std::sqrt(2.0 * std::log(40.0 * std::sqrt(2.0) /
                                           std::sqrt(M_PI)));
  CHECK(k::r_threshold(0.1) == doctest::Approx(expect).epsilon(1e-15));
  // Increasing away from the breakpoint; just below it the sqrt-log term
  // bends the curve down into a small dip before the jump.
  double prev = 0.0;
  for (double sig = 0.05; sig < 3.1; sig += 0.01) {
    const double r = k::r_threshold(sig);
    CHECK(r > prev);
    prev = r;
  }
  prev = k::r_threshold(brk + 1e-9);
  for (double sig = brk + 0.01; sig < 6.0; sig += 0.01) {
    const double r = k::r_threshold(sig);
    CHECK(r > prev);
    prev = r;
  }
  CHECK(k::r_threshold(3.19) < k::r_threshold(3.15));  // the dip
  CHECK(k::r_threshold(brk + 1e-9) > k::r_threshold(3.15));  // jump clears it
}

TEST_CASE("kappa constants") {
  CHECK_THROWS_AS(k::kappa_constants(0.5, 1.0), std::invalid_argument);

  const auto c11 = k::kappa_constants(1.0, 1.0);
  CHECK(c11.p_star > 0.0);
  CHECK(c11.kappa_tilde > 0.0);
  // Both min branches evaluated; the result is the smaller one.
  const double b1 = std::sqrt(M_PI) / 4.0 *
                    std::pow(c11.p_star, 0.75) *
                    std::pow(1.0 / (2.0 * std::sqrt(M_PI)), 0.25);
  const double b2 = 1.0 / (8.0 * std::sqrt(2.0 * M_PI) * (1.0 + std::sqrt(2.0))) *
                    std::exp(-25.0 / 4.0);
  CHECK(c11.kappa_tilde == doctest::Approx(std::min(b1, b2)).epsilon(1e-12));

  // Monotone non-increasing in rho on [nu, 10 nu].
  double prev = 1e300;
  for (int i = 0; i <= 64; ++i) {
    const double rho = 1.0 + 9.0 * i / 64.0;
    const double kt = k::kappa_constants(rho, 1.0).kappa_tilde;
    CHECK(kt <= prev * (1.0 + 1e-12));
    prev = kt;
  }

  // min over a in [1,4] can only improve on a = 1.
  for (double alpha : {0.5, 1.0, 2.0})
    CHECK(k::kappa_min(3.0, alpha) <=
          k::kappa_constants(3.0, alpha).kappa_tilde * (1.0 + 1e-12));
}

TEST_CASE("gh_expectation") {
  // Normalization and first moment are exact for any rule.
  CHECK(k::gh_expectation([](double) { return 1.0; }, -3.0, 2.0, 32) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(k::gh_expectation([](double z) { return z; }, 2.0, 3.0, 32) ==
        doctest::Approx(2.0).epsilon(1e-13));
  // Second moment of N(mu, sigma^2).
  CHECK(k::gh_expectation([](double z) { return z * z; }, 1.0, 2.0, 32) ==
        doctest::Approx(5.0).epsilon(1e-13));
  // sigma = 0 short-circuit.
  CHECK(k::gh_expectation([](double z) { return z * z; }, 3.0, 0.0) == 9.0);
  // Smooth integrand matches the closed-form convolution here (the kink sits
  // 10 standard deviations out, so Gauss-Hermite converges cleanly).
  CHECK(k::gh_expectation([](double z) { return k::loss_exp(z); }, 10.0, 1.0,
                          96) == doctest::Approx(k::g_sigma(10.0, 1.0))
                                     .epsilon(1e-10));
}

TEST_CASE("SmoothedLoss backend selector") {
  k::SmoothedLoss closed;
  k::SmoothedLoss quad;
  quad.backend = k::SmoothedLossBackend::quadrature;
  CHECK(quad.quadrature_nodes == 96);
  for (double sigma : {0.1, 1.0, 4.0}) {
    for (double mu : {0.0, 1.5, 20.0}) {
      CHECK(std::fabs(closed.value(mu, sigma) - quad.value(mu, sigma)) <=
            1e-8);
      CHECK(closed.value(mu, sigma) ==
            doctest::Approx(closed.value(-mu, sigma)).epsilon(1e-15));
    }
  }
  CHECK_THROWS_AS(k::gh_expectation([](double) { return 1.0; }, 0.0, 1.0, 4),
                  std::invalid_argument);
}

TEST_CASE("adaptive_simpson sanity") {
  CHECK(k::adaptive_simpson([](double x) { return x * x; }, 0.0, 3.0, 1e-12) ==
        doctest::Approx(9.0).epsilon(1e-12));
  CHECK(k::adaptive_simpson([](double x) { return std::sin(x); }, 0.0, M_PI,
                            1e-12) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("appendix-style grid bounds as properties") {
  spurlab::CounterRng rng(99, 5);
  for (int i = 0; i < 4000; ++i) {
    const double sigma = 0.05 + 4.95 * rng.uniform();
    const double mu = 30.0 * rng.uniform();
    const double g = k::g_sigma(mu, sigma);
    const double q = k::q_sigma(mu, sigma);
    // Derivative floor.
    CHECK(q >= -k::q_sigma_floor(mu, sigma) - 1e-10);
    // Envelope bounds.
    if (sigma <= 1.0) CHECK(g >= 0.25 * k::loss_exp(mu) - 1e-10);
    if (sigma <= 0.5) CHECK(g <= 2.0 * k::loss_exp(mu) + 1e-10);
    // Threshold bound on the shifted margin.
    const double r = k::r_threshold(sigma);
    const double mu2 = r + 20.0 * rng.uniform();
    CHECK(k::q_sigma(mu2, sigma) >=
          0.25 * sigma * k::loss_exp(mu2) - 1e-10);
  }
}

TEST_CASE("integral identities against quadrature") {
  for (double a : {-2.0, 0.0, 2.0}) {
    for (double b : {0.5, 1.0, 2.0}) {
      const auto f = [a, b](double x) {
        return std::exp(a * x - 0.5 * b * x * x);
      };
      const double span = std::fabs(a) / b + 14.0 / std::sqrt(b);
      const double full = k::adaptive_simpson(f, -span, span, 1e-12);
      const double half = k::adaptive_simpson(f, 0.0, span, 1e-12);
      CHECK(std::fabs(k::integral_exp_quadratic_full(a, b) - full) <= 1e-9);
      CHECK(std::fabs(k::integral_exp_quadratic_half(a, b) - half) <= 1e-9);
    }
  }
}
