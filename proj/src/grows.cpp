#include "holowb/grows.hpp"

#include <cmath>
#include <numeric>

#include "holowb/error.hpp"
#include "holowb/fft.hpp"
#include "holowb/recovery.hpp"

namespace holowb {

void GrowsSettings::validate() const {
  grid.validate();
  if (samples_per_symbol < grid.subcarriers) {
    throw Error(Errc::config, "GROWS: L (" + std::to_string(samples_per_symbol) +
                                  ") must be at least the subcarrier count (" +
                                  std::to_string(grid.subcarriers) + ")");
  }
}

SequenceRecovery recover_sequence(const HologramRecord& record, const GrowsSettings& settings) {
  const int L = settings.samples_per_symbol;
  if (L < 1 || record.intensities.size() != 2 * static_cast<std::size_t>(L) ||
      record.times.size() != record.intensities.size()) {
    throw Error(Errc::dimension, "recover_sequence: record must hold 2L samples");
  }
  RecoveryContext ctx;
  ctx.ref_amplitude = settings.reference.amplitude;
  ctx.phase_step = settings.reference.phase_step(settings.grid);

  SequenceRecovery out{CVector(L), 0};
  const auto half = static_cast<std::size_t>(L);
  for (std::size_t l = 0; l < half; ++l) {
    ctx.reference = reference_wave(settings.reference, record.times[l]);
    const auto r = recover_geometric_clamped(record.intensities[l], record.intensities[l + half], ctx);
    out.object_wave(static_cast<Eigen::Index>(l)) = r.value;
    if (r.clamped) ++out.clamps;
  }
  return out;
}

CVector derotate(const CVector& object_wave, const FrequencyGrid& grid, int samples_per_symbol) {
  const double offset = grid.carrier_cycles_per_symbol() - 1.0;
  const auto L = static_cast<double>(samples_per_symbol);
  CVector p(object_wave.size());
  for (Eigen::Index l = 0; l < object_wave.size(); ++l) {
    // offset * l reduced mod L before dividing, keeping the phase exact to rounding
    const double prod = offset * static_cast<double>(l);
    const double err = std::fma(offset, static_cast<double>(l), -prod);
    p(l) = object_wave(l) * phasor(-(std::fmod(prod, L) + err) / L);
  }
  return p;
}

CVector extract_channel(const CVector& derotated, int subcarriers) {
  const auto L = static_cast<std::size_t>(derotated.size());
  if (subcarriers < 1 || L < static_cast<std::size_t>(subcarriers)) {
    throw Error(Errc::dimension, "extract_channel: need L >= N_f");
  }
  const auto n_f = static_cast<std::size_t>(subcarriers);
  const auto factors = fft::prime_factors(L);
  const std::size_t radix_cost = std::accumulate(factors.begin(), factors.end(), std::size_t{0});

  CVector h(subcarriers);
  if (radix_cost < n_f) {
    const CVector spectrum = fft::forward(derotated);
    for (std::size_t k = 0; k < n_f; ++k) h(static_cast<Eigen::Index>(k)) = spectrum(static_cast<Eigen::Index>((k + 1) % L));
  } else {
    std::vector<std::size_t> bins(n_f);
    for (std::size_t k = 0; k < n_f; ++k) bins[k] = (k + 1) % L;
    h = fft::forward_bins(derotated, bins);
  }
  return h / static_cast<double>(L);
}

Estimate grows_estimate(const HologramRecord& record, const GrowsSettings& settings) {
  settings.validate();
  const auto seq = recover_sequence(record, settings);
  Estimate est;
  est.h = extract_channel(derotate(seq.object_wave, settings.grid, settings.samples_per_symbol),
                          settings.grid.subcarriers);
  est.clamps = seq.clamps;
  est.termination = Termination::direct;
  return est;
}

}  // namespace holowb
