#pragma once

#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "holowb/channel.hpp"
#include "holowb/types.hpp"

namespace holowb {

struct ReferenceWave {
  double amplitude = 1.0;     // A_r
  double frequency_hz = 0.0;  // f_r

  // delta = 2 pi (f_r - f_c) T_s
  double phase_step(const FrequencyGrid& grid) const;

  // f_r = f_c + delta / (2 pi T_s).
  static ReferenceWave with_phase_step(double amplitude, double phase_step, const FrequencyGrid& grid);
};

// 2L intensity samples of one array unit: indices [0, L) at t_l = l T_s / L,
// indices [L, 2L) at t_l + T_s.
struct HologramRecord {
  int unit_m = 0;
  int unit_n = 0;
  int samples_per_symbol = 0;  // L
  std::vector<double> times;
  std::vector<double> intensities;
  double noise_variance = 0.0;
  ReferenceWave reference;

  std::size_t size() const { return intensities.size(); }
};

// sum_k h_k e^{j 2 pi f_k t}
cplx object_wave(const CVector& h, const FrequencyGrid& grid, double t);
cplx reference_wave(const ReferenceWave& ref, double t);
double hologram_intensity(cplx e_r, cplx e_o);

std::vector<double> sample_times(const FrequencyGrid& grid, int samples_per_symbol);

// Draws one circularly symmetric complex Gaussian of variance noise_variance
// per sample and records |E_r + E_o + w|^2. noise_variance == 0 gives the
// noiseless intensities exactly (no draws are made).
HologramRecord sample_holograms(const CVector& h, const FrequencyGrid& grid, const ReferenceWave& ref,
                                int samples_per_symbol, double noise_variance, std::mt19937_64& rng);

// Mean of |E_o(t_l)|^2 over the first-symbol instants.
double mean_object_power(const CVector& h, const FrequencyGrid& grid, int samples_per_symbol);
double max_object_magnitude(const CVector& h, const FrequencyGrid& grid, int samples_per_symbol);

// sigma^2 = signal_power / 10^(snr_db / 10)
double noise_variance_for_snr(double signal_power, double snr_db);

// Columns: unit_m,unit_n,l,t_seconds,intensity
void write_hologram_csv(std::ostream& out, std::span<const HologramRecord> records);

}  // namespace holowb
