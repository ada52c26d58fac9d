#include "spurlab/special_functions.hpp"

#include <cmath>

namespace spurlab {
namespace {

// Rational coefficients for the three approximation regions (Cody, "Rational
// Chebyshev approximation for the error function").
constexpr double kA[5] = {3.16112374387056560e00, 1.13864154151050156e02,
                          3.77485237685302021e02, 3.20937758913846947e03,
                          1.85777706184603153e-1};
constexpr double kB[4] = {2.36012909523441209e01, 2.44024637934444173e02,
                          1.28261652607737228e03, 2.84423683343917062e03};
constexpr double kC[9] = {5.64188496988670089e-1, 8.88314979438837594e00,
                          6.61191906371416295e01, 2.98635138197400131e02,
                          8.81952221241769090e02, 1.71204761263407058e03,
                          2.05107837782607147e03, 1.23033935479799725e03,
                          2.15311535474403846e-8};
constexpr double kD[8] = {1.57449261107098347e01, 1.17693950891312499e02,
                          5.37181101862009858e02, 1.62138957456669019e03,
                          3.29079923573345963e03, 4.36261909014324716e03,
                          3.43936767414372164e03, 1.23033935480374942e03};
constexpr double kP[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                          1.25781726111229246e-1, 1.60837851487422766e-2,
                          6.58749161529837803e-4, 1.63153871373020978e-2};
constexpr double kQ[5] = {2.56852019228982242e00, 1.87295284992346047e00,
                          5.27905102951428412e-1, 6.05183413124413191e-2,
                          2.33520497626869185e-3};

constexpr double kThresh = 0.46875;
constexpr double kInvSqrtPi = 5.6418958354775628695e-1;

// erf on |x| <= 0.46875.
double erf_small(double x) {
  const double y = std::fabs(x);
  const double ysq = (y > 1.11e-16) ? y * y : 0.0;
  double num = kA[4] * ysq;
  double den = ysq;
  for (int i = 0; i < 3; ++i) {
    num = (num + kA[i]) * ysq;
    den = (den + kB[i]) * ysq;
  }
  return x * (num + kA[3]) / (den + kB[3]);
}

// erfcx on 0.46875 < y <= 4.
double erfcx_mid(double y) {
  double num = kC[8] * y;
  double den = y;
  for (int i = 0; i < 7; ++i) {
    num = (num + kC[i]) * y;
    den = (den + kD[i]) * y;
  }
  return (num + kC[7]) / (den + kD[7]);
}

// erfcx on y > 4, via the asymptotic-form rational fit in 1/y^2.
double erfcx_big(double y) {
  const double ysq = 1.0 / (y * y);
  double num = kP[5] * ysq;
  double den = ysq;
  for (int i = 0; i < 4; ++i) {
    num = (num + kP[i]) * ysq;
    den = (den + kQ[i]) * ysq;
  }
  const double r = ysq * (num + kP[4]) / (den + kQ[4]);
  return (kInvSqrtPi - r) / y;
}

// exp(-y*y) with the argument split so the rounding of y*y does not feed an
// amplified error through exp for large y.
double exp_neg_square(double y) {
  const double yhi = std::floor(y * 16.0) / 16.0;
  const double del = (y - yhi) * (y + yhi);
  return std::exp(-yhi * yhi) * std::exp(-del);
}

}  // namespace

double erf(double x) {
  const double y = std::fabs(x);
  if (y <= kThresh) return erf_small(x);
  return (x > 0.0) ? 1.0 - erfc(x) : erfc(-x) - 1.0;
}

double erfc(double x) {
  const double y = std::fabs(x);
  if (y <= kThresh) return 1.0 - erf_small(x);
  const double scaled = (y <= 4.0) ? erfcx_mid(y) : erfcx_big(y);
  const double r = exp_neg_square(y) * scaled;
  return (x < 0.0) ? 2.0 - r : r;
}

double erfcx(double x) {
  if (x < 0.0) {
    // erfcx(-x) = 2 exp(x^2) - erfcx(x); overflows for x < -26.6, which is
    // outside this library's call range.
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x <= kThresh) return std::exp(x * x) * (1.0 - erf_small(x));
  return (x <= 4.0) ? erfcx_mid(x) : erfcx_big(x);
}

double normal_cdf(double x) { return 0.5 * erfc(-x * 0.70710678118654752440); }

}  // namespace spurlab
