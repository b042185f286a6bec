#pragma once

#include <cstddef>
#include <vector>

#include "holowb/types.hpp"

namespace holowb::fft {

// Prime factorization in nondecreasing order; empty for n <= 1.
std::vector<std::size_t> prime_factors(std::size_t n);

// Forward DFT, X[k] = sum_n x[n] e^{-j 2 pi k n / N}. Mixed-radix
// Cooley-Tukey; prime-length stages are summed directly.
CVector forward(const CVector& x);

// Only the listed bins, by direct summation.
CVector forward_bins(const CVector& x, const std::vector<std::size_t>& bins);

}  // namespace holowb::fft
