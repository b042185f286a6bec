#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Core>

namespace holowb {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e^{j 2 pi cycles}. The integer part is dropped before the trig call so
// large phase arguments (carrier frequency times time) keep full precision.
inline cplx phasor(double cycles) {
  const double frac = cycles - std::floor(cycles);
  return std::polar(1.0, kTwoPi * frac);
}

// e^{j 2 pi a b}. The rounding error of a * b is recovered with an fma so
// the phase stays accurate when the product is many cycles long.
inline cplx phasor_product(double a, double b) {
  const double p = a * b;
  const double err = std::fma(a, b, -p);
  const double frac = (p - std::floor(p)) + err;
  return std::polar(1.0, kTwoPi * frac);
}

}  // namespace holowb
