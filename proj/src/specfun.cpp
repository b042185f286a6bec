#include "holowb/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "holowb/error.hpp"

namespace holowb::specfun {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_argument(double x, const char* fn) {
  if (!std::isfinite(x) || x < 0.0) {
    throw Error(Errc::domain, std::string(fn) + ": argument must be finite and nonnegative, got " +
                                  std::to_string(x));
  }
}

// (x/2)^nu * sum_k (x^2/4)^k / (k! (k+nu)!), nu in {0, 1}. All terms are
// positive so there is no cancellation.
double power_series(double x, int nu) {
  const double q = 0.25 * x * x;
  double term = nu == 0 ? 1.0 : 0.5 * x;
  double sum = term;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k + nu));
    sum += term;
    if (term <= sum * kEps) break;
  }
  return sum;
}

// I0(x) - 1 without the leading 1, for log1p near the origin
double i0_minus_one(double x) {
  const double q = 0.25 * x * x;
  double term = q;
  double sum = term;
  for (int k = 2; k < 1000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term <= sum * kEps) break;
  }
  return sum;
}

// Hankel sums S_0, S_1 with I_nu(x) ~ e^x / sqrt(2 pi x) * S_nu, plus their
// difference S_0 - S_1 summed term by term. Truncated at the smallest term
// of either series; for x >= kSeriesCutoff the truncation error is below
// double precision.
struct HankelSums {
  double s0;
  double s1;
  double diff;
};

HankelSums hankel_sums(double x) {
  double t0 = 1.0;
  double t1 = 1.0;
  HankelSums out{1.0, 1.0, 0.0};
  for (int k = 1; k < 500; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double denom = 8.0 * k * x;
    const double n0 = t0 * (odd * odd) / denom;
    const double n1 = t1 * (odd * odd - 4.0) / denom;
    if (std::abs(n0) >= std::abs(t0) || std::abs(n1) >= std::abs(t1)) break;
    t0 = n0;
    t1 = n1;
    out.s0 += t0;
    out.s1 += t1;
    out.diff += t0 - t1;
    if (std::abs(t0) < kEps * out.s0 && std::abs(t1) < kEps * out.s1) break;
  }
  return out;
}

double inv_sqrt_two_pi_x(double x) { return 1.0 / std::sqrt(2.0 * std::numbers::pi * x); }

// I1/I0 = 1 / (2/z + 1 / (4/z + 1 / (6/z + ...))), evaluated by modified Lentz.
double ratio_continued_fraction(double z) {
  constexpr double tiny = 1e-300;
  double f = tiny;
  double c = f;
  double d = 0.0;
  for (int k = 1; k < 10000; ++k) {
    const double b = 2.0 * k / z;
    d = b + d;
    if (d == 0.0) d = tiny;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return f;
}

}  // namespace

double bessel_i0(double x) {
  check_argument(x, "bessel_i0");
  if (x < kSeriesCutoff) return power_series(x, 0);
  return std::exp(x) * inv_sqrt_two_pi_x(x) * hankel_sums(x).s0;
}

double bessel_i1(double x) {
  check_argument(x, "bessel_i1");
  if (x < kSeriesCutoff) return power_series(x, 1);
  return std::exp(x) * inv_sqrt_two_pi_x(x) * hankel_sums(x).s1;
}

double bessel_i0_scaled(double x) {
  check_argument(x, "bessel_i0_scaled");
  if (x < kSeriesCutoff) return std::exp(-x) * power_series(x, 0);
  return inv_sqrt_two_pi_x(x) * hankel_sums(x).s0;
}

double bessel_i1_scaled(double x) {
  check_argument(x, "bessel_i1_scaled");
  if (x < kSeriesCutoff) return std::exp(-x) * power_series(x, 1);
  return inv_sqrt_two_pi_x(x) * hankel_sums(x).s1;
}

double log_bessel_i0(double x) {
  check_argument(x, "log_bessel_i0");
  if (x < 2.0) return std::log1p(i0_minus_one(x));
  if (x < kSeriesCutoff) return std::log(power_series(x, 0));
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(hankel_sums(x).s0);
}

double bessel_ratio(double z) {
  check_argument(z, "bessel_ratio");
  if (z == 0.0) return 0.0;
  if (z < kSeriesCutoff) return ratio_continued_fraction(z);
  const auto s = hankel_sums(z);
  return s.s1 / s.s0;
}

double bessel_ratio_complement(double z) {
  check_argument(z, "bessel_ratio_complement");
  if (z == 0.0) return 1.0;
  if (z < kSeriesCutoff) return 1.0 - ratio_continued_fraction(z);
  const auto s = hankel_sums(z);
  return s.diff / s.s0;
}

double bessel_ratio_derivative(double z) {
  if (!std::isfinite(z) || z <= 0.0) {
    throw Error(Errc::domain, "bessel_ratio_derivative: argument must be positive and finite");
  }
  const double c = bessel_ratio_complement(z);
  const double r = 1.0 - c;
  return c * (2.0 - c) - r / z;
}

}  // namespace holowb::specfun
