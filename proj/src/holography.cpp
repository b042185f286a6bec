#include "holowb/holography.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "holowb/error.hpp"

namespace holowb {

double ReferenceWave::phase_step(const FrequencyGrid& grid) const {
  return kTwoPi * (frequency_hz - grid.carrier_hz) * grid.symbol_period_s;
}

ReferenceWave ReferenceWave::with_phase_step(double amplitude, double phase_step,
                                             const FrequencyGrid& grid) {
  return ReferenceWave{amplitude, grid.carrier_hz + phase_step / (kTwoPi * grid.symbol_period_s)};
}

cplx object_wave(const CVector& h, const FrequencyGrid& grid, double t) {
  cplx acc{0.0, 0.0};
  for (Eigen::Index k = 0; k < h.size(); ++k) {
    acc += h(k) * phasor_product(grid.frequency(static_cast<int>(k)), t);
  }
  return acc;
}

cplx reference_wave(const ReferenceWave& ref, double t) {
  return ref.amplitude * phasor_product(ref.frequency_hz, t);
}

double hologram_intensity(cplx e_r, cplx e_o) { return std::norm(e_r + e_o); }

std::vector<double> sample_times(const FrequencyGrid& grid, int samples_per_symbol) {
  if (samples_per_symbol < 1) throw Error(Errc::config, "samples per symbol must be at least 1");
  const auto L = static_cast<std::size_t>(samples_per_symbol);
  std::vector<double> times(2 * L);
  for (std::size_t l = 0; l < L; ++l) {
    times[l] = static_cast<double>(l) / samples_per_symbol * grid.symbol_period_s;
    times[l + L] = times[l] + grid.symbol_period_s;
  }
  return times;
}

HologramRecord sample_holograms(const CVector& h, const FrequencyGrid& grid, const ReferenceWave& ref,
                                int samples_per_symbol, double noise_variance, std::mt19937_64& rng) {
  if (samples_per_symbol < 1) throw Error(Errc::config, "sample_holograms: L must be at least 1");
  if (!(noise_variance >= 0.0)) throw Error(Errc::config, "sample_holograms: noise variance must be nonnegative");

  HologramRecord rec;
  rec.samples_per_symbol = samples_per_symbol;
  rec.times = sample_times(grid, samples_per_symbol);
  rec.noise_variance = noise_variance;
  rec.reference = ref;
  rec.intensities.resize(rec.times.size());

  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * noise_variance));
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const double t = rec.times[i];
    cplx field = reference_wave(ref, t) + object_wave(h, grid, t);
    if (noise_variance > 0.0) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      field += cplx(re, im);
    }
    rec.intensities[i] = std::norm(field);
  }
  return rec;
}

double mean_object_power(const CVector& h, const FrequencyGrid& grid, int samples_per_symbol) {
  const auto times = sample_times(grid, samples_per_symbol);
  double acc = 0.0;
  for (int l = 0; l < samples_per_symbol; ++l) acc += std::norm(object_wave(h, grid, times[static_cast<std::size_t>(l)]));
  return acc / samples_per_symbol;
}

double max_object_magnitude(const CVector& h, const FrequencyGrid& grid, int samples_per_symbol) {
  const auto times = sample_times(grid, samples_per_symbol);
  double best = 0.0;
  for (int l = 0; l < samples_per_symbol; ++l)
    best = std::max(best, std::abs(object_wave(h, grid, times[static_cast<std::size_t>(l)])));
  return best;
}

double noise_variance_for_snr(double signal_power, double snr_db) {
  return signal_power / std::pow(10.0, snr_db / 10.0);
}

void write_hologram_csv(std::ostream& out, std::span<const HologramRecord> records) {
  out << "unit_m,unit_n,l,t_seconds,intensity\n";
  out << std::setprecision(17);
  for (const auto& rec : records) {
    for (std::size_t i = 0; i < rec.intensities.size(); ++i) {
      out << rec.unit_m << ',' << rec.unit_n << ',' << i << ',' << rec.times[i] << ','
          << rec.intensities[i] << '\n';
    }
  }
}

}  // namespace holowb
