#pragma once

// Modified Bessel functions of the first kind (orders 0 and 1) for
// nonnegative real arguments, and the ratio R(z) = I1(z) / I0(z).
//
// Small arguments use the power series; from kSeriesCutoff on, the Hankel
// asymptotic expansion with the e^x / sqrt(2 pi x) factor split off. The
// ratio never forms I1 and I0 separately, so it is finite for every finite z.
//
// All functions throw holowb::Error(Errc::domain) on negative or non-finite
// arguments.

namespace holowb::specfun {

inline constexpr double kSeriesCutoff = 20.0;

double bessel_i0(double x);
double bessel_i1(double x);

// e^{-x} I0(x) and e^{-x} I1(x); finite for all x >= 0.
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

double log_bessel_i0(double x);

double bessel_ratio(double z);

// 1 - R(z), accurate when R(z) is close to one.
double bessel_ratio_complement(double z);

// R'(z) = 1 - R(z)^2 - R(z)/z, z > 0.
double bessel_ratio_derivative(double z);

}  // namespace holowb::specfun
