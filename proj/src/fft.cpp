#include "holowb/fft.hpp"

#include <cmath>

namespace holowb::fft {

std::vector<std::size_t> prime_factors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

namespace {

// roots[i] = e^{-j 2 pi i / N} for the top-level length N; a stage of
// length n reads every (N / n)-th entry.
void transform(const cplx* in, std::size_t stride, std::size_t n, cplx* out,
               const std::vector<cplx>& roots, std::size_t root_step,
               const std::vector<std::size_t>& factors, std::size_t depth) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = factors[depth];
  const std::size_t m = n / p;
  for (std::size_t r = 0; r < p; ++r) {
    transform(in + r * stride, stride * p, m, out + r * m, roots, root_step * p, factors, depth + 1);
  }
  std::vector<cplx> column(p);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t r = 0; r < p; ++r) column[r] = out[r * m + k];
    for (std::size_t q = 0; q < p; ++q) {
      const std::size_t bin = k + q * m;
      cplx acc = column[0];
      for (std::size_t r = 1; r < p; ++r) acc += column[r] * roots[((r * bin) % n) * root_step];
      out[bin] = acc;
    }
  }
}

}  // namespace

CVector forward(const CVector& x) {
  const auto n = static_cast<std::size_t>(x.size());
  CVector out(x.size());
  if (n == 0) return out;
  std::vector<cplx> roots(n);
  for (std::size_t i = 0; i < n; ++i) {
    roots[i] = std::polar(1.0, -kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  }
  const auto factors = prime_factors(n);
  transform(x.data(), 1, n, out.data(), roots, 1, factors, 0);
  return out;
}

CVector forward_bins(const CVector& x, const std::vector<std::size_t>& bins) {
  const auto n = static_cast<std::size_t>(x.size());
  CVector out(static_cast<Eigen::Index>(bins.size()));
  for (std::size_t b = 0; b < bins.size(); ++b) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t e = (bins[b] * i) % n;
      acc += x(static_cast<Eigen::Index>(i)) *
             std::polar(1.0, -kTwoPi * static_cast<double>(e) / static_cast<double>(n));
    }
    out(static_cast<Eigen::Index>(b)) = acc;
  }
  return out;
}

}  // namespace holowb::fft
