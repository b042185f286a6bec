#pragma once

// Geometric rotation-based object wave sensing: two-hologram recovery at
// L instants, derotation by the carrier offset, then an L-point DFT whose
// bins 1..N_f are the channel coefficients.

#include "holowb/channel.hpp"
#include "holowb/estimate.hpp"
#include "holowb/holography.hpp"

namespace holowb {

struct GrowsSettings {
  int samples_per_symbol = 0;  // L, must be >= N_f
  FrequencyGrid grid;
  ReferenceWave reference;

  void validate() const;
};

struct SequenceRecovery {
  CVector object_wave;  // length L
  int clamps = 0;
};

SequenceRecovery recover_sequence(const HologramRecord& record, const GrowsSettings& settings);

// p[l] = E_o[l] e^{-j 2 pi (f_c T_s - 1) l / L}
CVector derotate(const CVector& object_wave, const FrequencyGrid& grid, int samples_per_symbol);

// h_k = P(k) / L for DFT bins k = 1..N_f.
CVector extract_channel(const CVector& derotated, int subcarriers);

Estimate grows_estimate(const HologramRecord& record, const GrowsSettings& settings);

}  // namespace holowb
