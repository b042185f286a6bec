#pragma once

// Wideband multipath channel over a planar array of N_v rows by N_h columns.
//
// H(t) = A C(t) B with A the N_t x P steering matrix, C(t) the diagonal of
// per-path Doppler coefficients and B the P x N_f delay responses. Row
// m * N_v + n of H holds unit (m, n), m the column index in [0, N_h) and
// n the row index in [0, N_v).

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "holowb/types.hpp"
#include "json.hpp"

namespace holowb {

inline constexpr double kSpeedOfLight = 299792458.0;

struct ArrayGeometry {
  int n_rows = 4;          // N_v
  int n_cols = 4;          // N_h
  double spacing_v = 0.0;  // D_v, meters
  double spacing_h = 0.0;  // D_h, meters
  double wavelength = 0.0; // lambda_0 = c / f_c, meters

  int units() const { return n_rows * n_cols; }
  int unit_index(int m, int n) const { return m * n_rows + n; }
  void validate() const;

  // Half-wavelength spacing at the given carrier.
  static ArrayGeometry half_wavelength(int n_rows, int n_cols, double carrier_hz);
};

// OFDM grid: f_k = f_c + k / T_s for k = 0..N_f-1.
struct FrequencyGrid {
  double carrier_hz = 3.5e9;
  int subcarriers = 132;
  double symbol_period_s = 1.0 / 30e3;

  double spacing_hz() const { return 1.0 / symbol_period_s; }
  double frequency(int k) const { return carrier_hz + k / symbol_period_s; }
  // f_c * T_s, the carrier phase advance over one symbol in cycles.
  double carrier_cycles_per_symbol() const { return carrier_hz * symbol_period_s; }
  void validate() const;
};

struct Path {
  double delay_s = 0.0;
  cplx amplitude{1.0, 0.0};  // beta_p with the static location phase folded in
  double zoa_rad = 0.0;
  double aoa_rad = 0.0;
  double doppler_hz = 0.0;
};

struct PathSet {
  std::vector<Path> paths;
  double ue_speed = 0.0;
  double velocity_zoa = 0.0;
  double velocity_aoa = 0.0;

  std::size_t size() const { return paths.size(); }
  double total_power() const;
};

struct ChannelSnapshot {
  CMatrix matrix;  // N_t x N_f
  double time_s = 0.0;

  CVector unit_row(const ArrayGeometry& geom, int m, int n) const {
    return matrix.row(geom.unit_index(m, n)).transpose();
  }
};

CVector steering_vector(const ArrayGeometry& geom, double zoa, double aoa);
CVector delay_response(double delay_s, const FrequencyGrid& grid);
cplx doppler_coefficient(const Path& path, double t);

// Throws Errc::config on an empty path set.
ChannelSnapshot assemble_channel(const PathSet& paths, const ArrayGeometry& geom,
                                 const FrequencyGrid& grid, double t);

// omega_p = r_hat^T v / lambda_0 for a UE moving at `speed` along
// (velocity_zoa, velocity_aoa).
double doppler_from_velocity(double zoa, double aoa, double speed, double velocity_zoa,
                             double velocity_aoa, double wavelength);

struct PathConfig {
  int clusters = 2;
  int rays = 20;
  double zoa_spread_deg = 82.0;
  double aoa_spread_deg = 98.0;
  double delay_spread_s = 100e-9;
  std::vector<double> cluster_powers;  // relative; empty means equal split
  double total_power = 1.0;
  double ue_speed = 0.0;
  double velocity_zoa = 0.0;
  double velocity_aoa = 0.0;

  void validate() const;
};

// Clustered path draw. Cluster means are uniform (zenith in [0, pi],
// azimuth in [-pi, pi]); rays scatter around them with Gaussian offsets of
// the configured RMS spread. Every ray of a cluster shares the cluster
// delay (exponential with mean delay_spread_s) and the cluster power split
// evenly; phases are uniform. The result is scaled so sum |beta|^2 equals
// total_power.
PathSet generate_paths(const PathConfig& config, double wavelength, std::mt19937_64& rng);

// JSON array of {delay_s, beta_re, beta_im, zoa_rad, aoa_rad, doppler_hz}.
nlohmann::json paths_to_json(const PathSet& paths);
PathSet paths_from_json(const nlohmann::json& doc);
PathSet load_paths(const std::string& file);
void save_paths(const PathSet& paths, const std::string& file);

}  // namespace holowb
