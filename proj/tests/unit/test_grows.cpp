#include "doctest.h"

#include <random>

#include "../oracles.hpp"
#include "holowb/crlb.hpp"
#include "holowb/error.hpp"
#include "holowb/fft.hpp"
#include "holowb/grows.hpp"

using namespace holowb;

namespace {

CVector naive_dft(const CVector& x) {
  const auto n = x.size();
  CVector out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += x(i) * oracle::expj(-kTwoPi * static_cast<double>((k * i) % n) / static_cast<double>(n));
    }
    out(k) = acc;
  }
  return out;
}

GrowsSettings settings_for(const FrequencyGrid& grid, int L, double a_r, double delta = std::numbers::pi / 2) {
  return GrowsSettings{L, grid, ReferenceWave::with_phase_step(a_r, delta, grid)};
}

// A_r at K times the peak object magnitude, as the harness sets it.
double reference_for(const CVector& h, const FrequencyGrid& grid, int L, double k = 4.0) {
  return k * max_object_magnitude(h, grid, L);
}

}  // namespace

TEST_CASE("prime factors") {
  CHECK(fft::prime_factors(1).empty());
  CHECK(fft::prime_factors(132) == std::vector<std::size_t>{2, 2, 3, 11});
  CHECK(fft::prime_factors(97) == std::vector<std::size_t>{97});
  CHECK(fft::prime_factors(1680) == std::vector<std::size_t>{2, 2, 2, 2, 3, 5, 7});
}

TEST_CASE("mixed-radix FFT matches the naive DFT") {
  std::mt19937_64 rng(4);
  for (int n : {1, 2, 3, 4, 7, 12, 32, 100, 132, 97, 243, 1680}) {
    CAPTURE(n);
    const CVector x = oracle::random_cvec(rng, n);
    const CVector ref = naive_dft(x);
    CHECK(oracle::rel_err(fft::forward(x), ref) < 1e-12);
    const std::vector<std::size_t> bins{0, static_cast<std::size_t>(n) / 2, static_cast<std::size_t>(n) - 1};
    const CVector some = fft::forward_bins(x, bins);
    for (std::size_t i = 0; i < bins.size(); ++i) {
      CHECK(std::abs(some(static_cast<Eigen::Index>(i)) - ref(static_cast<Eigen::Index>(bins[i]))) < 1e-10 * ref.norm());
    }
  }
}

TEST_CASE("derotation") {
  const int L = 16;
  FrequencyGrid unity{1.0 / 1e-3, 4, 1e-3};  // f_c T_s = 1
  std::mt19937_64 rng(8);
  const CVector x = oracle::random_cvec(rng, L);
  CHECK(oracle::rel_err(derotate(x, unity, L), x) < 1e-15);

  FrequencyGrid quarter{(1.0 + L / 4.0) / 1e-3, 4, 1e-3};
  const CVector p = derotate(CVector::Ones(L), quarter, L);
  for (int l = 0; l < L; ++l) CHECK(std::abs(p(l) - oracle::expj(-std::numbers::pi * l / 2)) < 1e-12);

  FrequencyGrid grid;
  const CVector q = derotate(x, grid, L);
  CHECK((q.cwiseAbs() - x.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("channel extraction from DFT bins") {
  const int L = 10;
  CVector tone(L);
  for (int l = 0; l < L; ++l) tone(l) = oracle::expj(kTwoPi * l / L);
  const CVector h1 = extract_channel(tone, 1);
  CHECK(std::abs(h1(0) - cplx(1, 0)) < 1e-14);
  CHECK(extract_channel(CVector::Zero(L), 4).norm() == 0.0);

  std::mt19937_64 rng(9);
  for (int n_f : {1, 5, 12, 32, 97, 132}) {
    for (int extra : {0, 3}) {
      const int len = n_f + extra;
      CAPTURE(len);
      const CVector h = oracle::random_cvec(rng, n_f);
      CVector p = CVector::Zero(len);
      for (int l = 0; l < len; ++l) {
        for (int k = 0; k < n_f; ++k) p(l) += h(k) * oracle::expj(kTwoPi * static_cast<double>(((k + 1) * l) % len) / len);
      }
      CHECK(oracle::rel_err(extract_channel(p, n_f), h) < 1e-10);
    }
  }
  CHECK_THROWS_AS(extract_channel(CVector::Zero(4), 5), Error);
}

TEST_CASE("sequence recovery round trip") {
  FrequencyGrid grid{3.5e9, 24, 1.0 / 30e3};
  const int L = 24;
  std::mt19937_64 rng(12);
  const CVector h = oracle::random_cvec(rng, 24, 0.1);
  const auto s = settings_for(grid, L, reference_for(h, grid, L));
  const auto rec = sample_holograms(h, grid, s.reference, L, 0.0, rng);
  const auto seq = recover_sequence(rec, s);
  CHECK(seq.clamps == 0);
  for (int l = 0; l < L; ++l) {
    CHECK(std::abs(seq.object_wave(l) - object_wave(h, grid, rec.times[static_cast<std::size_t>(l)])) < 1e-9);
  }

  const auto zero = recover_sequence(sample_holograms(CVector::Zero(24), grid, s.reference, L, 0.0, rng), s);
  CHECK(zero.object_wave.cwiseAbs().maxCoeff() < 1e-9);

  HologramRecord short_rec = rec;
  short_rec.intensities.pop_back();
  short_rec.times.pop_back();
  CHECK_THROWS_AS(recover_sequence(short_rec, s), Error);
}

TEST_CASE("heavy noise clamps but stays finite") {
  FrequencyGrid grid{3.5e9, 16, 1.0 / 30e3};
  const int L = 16;
  std::mt19937_64 rng(13);
  const CVector h = oracle::random_cvec(rng, 16, 0.1);
  const auto s = settings_for(grid, L, 1.0);
  const auto rec = sample_holograms(h, grid, s.reference, L, 100.0, rng);
  const auto seq = recover_sequence(rec, s);
  CHECK(seq.clamps > 0);
  CHECK(seq.object_wave.allFinite());
  const auto est = grows_estimate(rec, s);
  CHECK(est.h.allFinite());
  CHECK(est.clamps == seq.clamps);
}

TEST_CASE("noiseless end-to-end exactness") {
  std::mt19937_64 rng(14);
  for (int n_f : {1, 4, 12, 32, 132}) {
    for (int extra : {0, 7}) {
      FrequencyGrid grid{3.5e9, n_f, 1.0 / 30e3};
      const int L = n_f + extra;
      CAPTURE(L);
      const CVector h = oracle::random_cvec(rng, n_f, 0.2);
      for (double delta : {std::numbers::pi / 2, 1.0, -2.0}) {
        CAPTURE(delta);
        // 10% margin over the distance from the origin to the line through both circle centers
        const double k = 1.1 / std::abs(std::cos(delta / 2));
        const auto s = settings_for(grid, L, reference_for(h, grid, L, k), delta);
        const auto rec = sample_holograms(h, grid, s.reference, L, 0.0, rng);
        const auto est = grows_estimate(rec, s);
        CHECK(est.termination == Termination::direct);
        CHECK((est.h - h).norm() / h.norm() < 1e-9);
      }
    }
  }
}

TEST_CASE("L below N_f is rejected") {
  FrequencyGrid grid{3.5e9, 8, 1.0 / 30e3};
  const auto s = settings_for(grid, 7, 1.0);
  std::mt19937_64 rng(1);
  const auto rec = sample_holograms(CVector::Zero(8), grid, s.reference, 7, 0.0, rng);
  try {
    grows_estimate(rec, s);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
  }
}

TEST_CASE("same inputs give identical estimates") {
  FrequencyGrid grid{3.5e9, 12, 1.0 / 30e3};
  std::mt19937_64 a(5), b(5);
  const CVector h = oracle::random_cvec(a, 12, 0.1);
  oracle::random_cvec(b, 12, 0.1);
  const auto s = settings_for(grid, 12, 0.8);
  const auto e1 = grows_estimate(sample_holograms(h, grid, s.reference, 12, 1e-3, a), s);
  const auto e2 = grows_estimate(sample_holograms(h, grid, s.reference, 12, 1e-3, b), s);
  CHECK(e1.h == e2.h);
}

TEST_CASE("GROWS at 20 dB sits within 3 dB of the CRLB floor") {
  FrequencyGrid grid{3.5e9, 16, 1.0 / 30e3};
  const int L = 16;
  std::mt19937_64 rng(31);
  const CVector h = oracle::random_cvec(rng, 16, 0.1);
  const double a_r = reference_for(h, grid, L);
  const auto s = settings_for(grid, L, a_r);
  const double s2 = noise_variance_for_snr(mean_object_power(h, grid, L), 20.0);

  double err = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const auto rec = sample_holograms(h, grid, s.reference, L, s2, rng);
    err += (grows_estimate(rec, s).h - h).squaredNorm();
  }
  const double nmse = 10 * std::log10(err / trials / h.squaredNorm());

  auto rec = sample_holograms(h, grid, s.reference, L, s2, rng);
  const auto ctx = LikelihoodContext::from_record(rec, grid);
  const double floor = crlb_report(h, ctx, JMode::quadrature).nmse_floor_db;
  CAPTURE(nmse);
  CAPTURE(floor);
  CHECK(std::abs(nmse - floor) <= 3.0);
}

TEST_CASE("GROWS NMSE does not grow with the reference amplitude") {
  FrequencyGrid grid{3.5e9, 16, 1.0 / 30e3};
  const int L = 16;
  std::mt19937_64 rng(41);
  const CVector h = oracle::random_cvec(rng, 16, 0.1);
  const double s2 = noise_variance_for_snr(mean_object_power(h, grid, L), 10.0);
  const double peak = max_object_magnitude(h, grid, L);
  double prev = 1e300;
  for (double k : {2.0, 4.0, 8.0, 16.0}) {
    const auto s = settings_for(grid, L, k * peak);
    std::mt19937_64 noise(77);  // common random numbers across K
    double err = 0.0;
    for (int t = 0; t < 200; ++t) err += (grows_estimate(sample_holograms(h, grid, s.reference, L, s2, noise), s).h - h).squaredNorm();
    CAPTURE(k);
    CHECK(err <= prev);
    prev = err;
  }
}
