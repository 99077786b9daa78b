#pragma once

namespace vmtorus {

// Modified Bessel functions of the first kind, orders 0 and 1, for x >= 0.
// Power series up to x = 15, exponentially scaled asymptotic expansion beyond.

double bessel_i0(double x);
double bessel_i1(double x);

/// exp(-x) I0(x); finite for every finite x >= 0.
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

double log_bessel_i0(double x);

/// Mean resultant length of a von Mises(kappa) variable, I1(kappa) / I0(kappa).
double bessel_ratio_a1(double kappa);

}  // namespace vmtorus
