#pragma once

// Seeded Monte Carlo runner: draws channels, samples holograms for every
// array unit, runs GROWS and WH-ML, and aggregates NMSE per sweep point
// next to a CRLB floor.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "holowb/channel.hpp"
#include "holowb/crlb.hpp"
#include "holowb/holography.hpp"
#include "holowb/whml.hpp"
#include "json.hpp"

namespace holowb {

inline constexpr double kNmseFloorDb = -300.0;

struct Scenario {
  int n_rows = 4;
  int n_cols = 4;
  double spacing_wavelengths = 0.5;
  FrequencyGrid grid;
  PathConfig paths;
  int samples_per_symbol = 0;  // L; 0 picks max(100, N_f)
  double phase_step = std::numbers::pi / 2.0;
  double k_factor = 4.0;
  bool global_k = false;  // A_r from the max over all units instead of per unit
  double snr_db = 10.0;   // +inf means noiseless
  int trials = 100;
  std::uint64_t seed = 1;
  bool fixed_channel = false;  // every trial reuses the trial-0 channel; only noise varies
  std::string sweep_variable;  // "", "snr", "k" or "rb"
  std::vector<double> sweep_values;
  bool run_grows = true;
  bool run_whml = true;
  bool run_crlb = true;
  JMode j_mode = JMode::quadrature;
  InformationForm information_form = InformationForm::score_consistent;
  SolverOptions solver;

  ArrayGeometry geometry() const;
  // L actually used; raised to N_f when smaller.
  int effective_samples() const;
  bool noiseless() const { return std::isinf(snr_db) && snr_db > 0; }
  void validate() const;
  std::vector<std::string> warnings() const;
};

// Throws Errc::config with the offending field path, e.g. "hologram.K: must be positive".
Scenario scenario_from_json(const nlohmann::json& doc);
Scenario load_scenario(const std::string& file);

// Copy of `base` with one sweep variable set: snr (dB), k, or rb (N_f = 12 rb).
Scenario apply_sweep_value(const Scenario& base, const std::string& variable, double value);

// 10 log10(||h_hat - h||^2 / ||h||^2), floored at kNmseFloorDb.
double nmse_db(const CVector& h_hat, const CVector& h_true);

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream);

struct UnitOutcome {
  double squared_error = 0.0;
  double energy = 0.0;
  bool failed = false;
  int clamps = 0;
  int iterations = 0;
};

struct TrialResult {
  std::uint64_t trial = 0;
  double noise_variance = 0.0;
  std::vector<UnitOutcome> grows;  // one per unit, empty when disabled
  std::vector<UnitOutcome> whml;
};

// Everything a trial draws, exposed for tests and the CRLB representative.
struct TrialDraw {
  CMatrix channel;  // N_t x N_f at t = 0
  std::vector<HologramRecord> records;
  double noise_variance = 0.0;
};

TrialDraw draw_trial(const Scenario& scenario, std::uint64_t trial);
TrialResult run_trial(const Scenario& scenario, std::uint64_t trial);

// Mean over units of tr(Re R^-1) / ||h||^2 in dB for the given draw.
// NaN when the bound is undefined (noiseless) or singular.
double crlb_floor_db(const Scenario& scenario, const TrialDraw& draw);

struct ResultRow {
  std::string sweep_var;
  double value = 0.0;
  std::string estimator;
  double nmse_db = std::numeric_limits<double>::quiet_NaN();  // NaN when every unit failed
  double crlb_db = std::numeric_limits<double>::quiet_NaN();  // representative draw (trial 0)
  int trials = 0;
  int failures = 0;
  int clamps = 0;
};

struct SweepOptions {
  int workers = 1;
  std::ostream* log = nullptr;
};

// Runs trials [0, scenario.trials) on a pool of workers. Results come back
// in trial order regardless of worker count.
std::vector<TrialResult> run_trials(const Scenario& scenario, int workers);

std::vector<ResultRow> summarize(const Scenario& scenario, const std::string& sweep_var, double value,
                                 const std::vector<TrialResult>& trials, double crlb_db);

std::vector<ResultRow> run_sweep(const Scenario& scenario, const SweepOptions& options = {});

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace holowb
