#pragma once

// Self-contained error-function family (rational Chebyshev approximations,
// Cody/SPECFUN style). Implemented here rather than taken from libm so that
// results are bit-identical across platforms and toolchains.
//
// Accuracy: relative error below 1e-14 for erf/erfc on the range used by the
// library (|x| <= 10; beyond that the exp(-x*x) factor dominates rounding),
// and below 1e-15 for the scaled form erfcx.

namespace spurlab {

// erf(x) = 2/sqrt(pi) * int_0^x exp(-t^2) dt
double erf(double x);

// erfc(x) = 1 - erf(x), computed without cancellation for large x.
double erfc(double x);

// erfcx(x) = exp(x^2) * erfc(x). Stays O(1/x) for large positive x; this is
// the building block for all overflow-safe Gaussian-convolution formulas.
double erfcx(double x);

// Standard normal CDF.
double normal_cdf(double x);

}  // namespace spurlab
