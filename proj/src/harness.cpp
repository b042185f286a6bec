#include "holowb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "holowb/error.hpp"
#include "holowb/grows.hpp"

namespace holowb {

using nlohmann::json;

// ---------------------------------------------------------------------------
// config parsing

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  throw Error(Errc::config, path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  if (!obj.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) config_error(path.empty() ? key : path + "." + key, "unknown field");
  }
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

double read_number(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) config_error(join(path, key), "expected a number");
  return v.get<double>();
}

int read_count(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 1'000'000'000) {
    config_error(join(path, key), "expected a nonnegative integer");
  }
  return static_cast<int>(v.get<long long>());
}

// Accepts a number or the strings "inf" / "+inf".
double read_extended(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_string() && (v == "inf" || v == "+inf")) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) config_error(join(path, key), "expected a number or \"inf\"");
  return v.get<double>();
}

std::string read_string(const json& obj, const std::string& path, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) config_error(join(path, key), "expected a string");
  return v.get<std::string>();
}

}  // namespace

ArrayGeometry Scenario::geometry() const {
  ArrayGeometry g;
  g.n_rows = n_rows;
  g.n_cols = n_cols;
  g.wavelength = kSpeedOfLight / grid.carrier_hz;
  g.spacing_v = spacing_wavelengths * g.wavelength;
  g.spacing_h = spacing_wavelengths * g.wavelength;
  return g;
}

int Scenario::effective_samples() const {
  const int l = samples_per_symbol > 0 ? samples_per_symbol : 100;
  return std::max(l, grid.subcarriers);
}

void Scenario::validate() const {
  if (n_rows <= 0) config_error("geometry.rows", "must be positive");
  if (n_cols <= 0) config_error("geometry.cols", "must be positive");
  if (!(spacing_wavelengths > 0.0)) config_error("geometry.spacing_wavelengths", "must be positive");
  grid.validate();
  paths.validate();
  if (samples_per_symbol < 0) config_error("hologram.L", "must be nonnegative");
  if (!(k_factor > 0.0) || !std::isfinite(k_factor)) config_error("hologram.K", "must be positive");
  if (!std::isfinite(phase_step)) config_error("hologram.delta_rad", "must be finite");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) config_error("snr_db", "must be a number or \"inf\"");
  if (trials <= 0) config_error("trials", "must be positive");
  if (!sweep_variable.empty()) {
    if (sweep_variable != "snr" && sweep_variable != "k" && sweep_variable != "rb") {
      config_error("sweep.variable", "must be one of snr, k, rb");
    }
    if (sweep_values.empty()) config_error("sweep.values", "empty sweep grid");
    for (double v : sweep_values) {
      if (std::isnan(v)) config_error("sweep.values", "NaN entry");
      if (sweep_variable == "k" && !(v > 0.0)) config_error("sweep.values", "K values must be positive");
      if (sweep_variable == "rb" && (!(v >= 1.0) || v != std::floor(v))) {
        config_error("sweep.values", "RB counts must be positive integers");
      }
    }
  }
  if (!run_grows && !run_whml) config_error("estimators", "no estimator selected");
  solver.validate();
}

std::vector<std::string> Scenario::warnings() const {
  std::vector<std::string> out;
  auto check_k = [&](double k) {
    if (k <= 1.0) {
      out.push_back("K = " + std::to_string(k) + " does not keep A_r above |E_o|; expect clamped recoveries");
    }
  };
  if (sweep_variable == "k") {
    for (double v : sweep_values) check_k(v);
  } else {
    check_k(k_factor);
  }
  if (samples_per_symbol > 0 && samples_per_symbol < grid.subcarriers) {
    out.push_back("hologram.L raised to the subcarrier count " + std::to_string(grid.subcarriers));
  }
  if (std::abs(std::sin(phase_step)) < 1e-3) out.push_back("delta close to a multiple of pi; recovery is ill-conditioned");
  return out;
}

Scenario scenario_from_json(const json& doc) {
  reject_unknown(doc, "", {"geometry", "grid", "paths", "hologram", "snr_db", "sweep", "trials", "seed",
                           "fixed_channel", "estimators", "crlb", "solver"});
  Scenario s;

  if (doc.contains("geometry")) {
    const auto& g = doc["geometry"];
    reject_unknown(g, "geometry", {"rows", "cols", "spacing_wavelengths"});
    s.n_rows = read_count(g, "geometry", "rows", s.n_rows);
    s.n_cols = read_count(g, "geometry", "cols", s.n_cols);
    s.spacing_wavelengths = read_number(g, "geometry", "spacing_wavelengths", s.spacing_wavelengths);
  }

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    reject_unknown(g, "grid", {"carrier_hz", "subcarrier_spacing_hz", "subcarriers", "resource_blocks"});
    s.grid.carrier_hz = read_number(g, "grid", "carrier_hz", s.grid.carrier_hz);
    const double spacing = read_number(g, "grid", "subcarrier_spacing_hz", s.grid.spacing_hz());
    if (!(spacing > 0.0)) config_error("grid.subcarrier_spacing_hz", "must be positive");
    s.grid.symbol_period_s = 1.0 / spacing;
    if (g.contains("subcarriers") && g.contains("resource_blocks")) {
      config_error("grid", "give either subcarriers or resource_blocks, not both");
    }
    s.grid.subcarriers = read_count(g, "grid", "subcarriers", s.grid.subcarriers);
    if (g.contains("resource_blocks")) s.grid.subcarriers = 12 * read_count(g, "grid", "resource_blocks", 0);
  }

  if (doc.contains("paths")) {
    const auto& p = doc["paths"];
    reject_unknown(p, "paths", {"clusters", "rays", "zoa_spread_deg", "aoa_spread_deg", "delay_spread_s",
                                "cluster_powers", "total_power", "ue_speed_mps", "velocity_zoa_rad",
                                "velocity_aoa_rad"});
    s.paths.clusters = read_count(p, "paths", "clusters", s.paths.clusters);
    s.paths.rays = read_count(p, "paths", "rays", s.paths.rays);
    s.paths.zoa_spread_deg = read_number(p, "paths", "zoa_spread_deg", s.paths.zoa_spread_deg);
    s.paths.aoa_spread_deg = read_number(p, "paths", "aoa_spread_deg", s.paths.aoa_spread_deg);
    s.paths.delay_spread_s = read_number(p, "paths", "delay_spread_s", s.paths.delay_spread_s);
    s.paths.total_power = read_number(p, "paths", "total_power", s.paths.total_power);
    s.paths.ue_speed = read_number(p, "paths", "ue_speed_mps", s.paths.ue_speed);
    s.paths.velocity_zoa = read_number(p, "paths", "velocity_zoa_rad", s.paths.velocity_zoa);
    s.paths.velocity_aoa = read_number(p, "paths", "velocity_aoa_rad", s.paths.velocity_aoa);
    if (p.contains("cluster_powers")) {
      const auto& cp = p["cluster_powers"];
      if (!cp.is_array()) config_error("paths.cluster_powers", "expected an array of numbers");
      for (std::size_t i = 0; i < cp.size(); ++i) {
        if (!cp[i].is_number()) config_error("paths.cluster_powers[" + std::to_string(i) + "]", "expected a number");
        s.paths.cluster_powers.push_back(cp[i].get<double>());
      }
    }
  }

  if (doc.contains("hologram")) {
    const auto& h = doc["hologram"];
    reject_unknown(h, "hologram", {"L", "delta_rad", "K", "k_normalization"});
    s.samples_per_symbol = read_count(h, "hologram", "L", s.samples_per_symbol);
    s.phase_step = read_number(h, "hologram", "delta_rad", s.phase_step);
    s.k_factor = read_number(h, "hologram", "K", s.k_factor);
    const auto norm = read_string(h, "hologram", "k_normalization", "per_unit");
    if (norm != "per_unit" && norm != "global") config_error("hologram.k_normalization", "must be per_unit or global");
    s.global_k = norm == "global";
  }

  s.snr_db = read_extended(doc, "", "snr_db", s.snr_db);
  s.trials = read_count(doc, "", "trials", s.trials);
  if (doc.contains("seed")) {
    const auto& v = doc["seed"];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      config_error("seed", "expected an unsigned 64-bit integer");
    }
    s.seed = v.get<std::uint64_t>();
  }

  if (doc.contains("fixed_channel")) {
    if (!doc["fixed_channel"].is_boolean()) config_error("fixed_channel", "expected a boolean");
    s.fixed_channel = doc["fixed_channel"].get<bool>();
  }

  if (doc.contains("sweep")) {
    const auto& sw = doc["sweep"];
    reject_unknown(sw, "sweep", {"variable", "values"});
    s.sweep_variable = read_string(sw, "sweep", "variable", "");
    if (s.sweep_variable.empty()) config_error("sweep.variable", "required when a sweep is given");
    if (!sw.contains("values") || !sw["values"].is_array()) config_error("sweep.values", "expected an array");
    const auto& vals = sw["values"];
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (vals[i].is_string() && (vals[i] == "inf" || vals[i] == "+inf")) {
        s.sweep_values.push_back(std::numeric_limits<double>::infinity());
      } else if (vals[i].is_number()) {
        s.sweep_values.push_back(vals[i].get<double>());
      } else {
        config_error("sweep.values[" + std::to_string(i) + "]", "expected a number");
      }
    }
  }

  if (doc.contains("estimators")) {
    const auto& e = doc["estimators"];
    if (!e.is_array()) config_error("estimators", "expected an array of names");
    s.run_grows = s.run_whml = false;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const std::string name = e[i].is_string() ? e[i].get<std::string>() : "";
      if (name == "grows") {
        s.run_grows = true;
      } else if (name == "whml") {
        s.run_whml = true;
      } else {
        config_error("estimators[" + std::to_string(i) + "]", "expected \"grows\" or \"whml\"");
      }
    }
  }

  if (doc.contains("crlb")) {
    const auto& c = doc["crlb"];
    reject_unknown(c, "crlb", {"enabled", "j_mode", "form"});
    if (c.contains("enabled")) {
      if (!c["enabled"].is_boolean()) config_error("crlb.enabled", "expected a boolean");
      s.run_crlb = c["enabled"].get<bool>();
    }
    const auto mode = read_string(c, "crlb", "j_mode", "quadrature");
    if (mode != "quadrature" && mode != "approx") config_error("crlb.j_mode", "must be quadrature or approx");
    s.j_mode = mode == "approx" ? JMode::approx : JMode::quadrature;
    const auto form = read_string(c, "crlb", "form", "score_consistent");
    if (form != "score_consistent" && form != "published") config_error("crlb.form", "must be score_consistent or published");
    s.information_form = form == "published" ? InformationForm::published : InformationForm::score_consistent;
  }

  if (doc.contains("solver")) {
    const auto& o = doc["solver"];
    reject_unknown(o, "solver", {"armijo_alpha", "reduction", "max_iterations", "gradient_tolerance",
                                 "step_tolerance", "hessian_damping"});
    s.solver.armijo_alpha = read_number(o, "solver", "armijo_alpha", s.solver.armijo_alpha);
    s.solver.reduction = read_number(o, "solver", "reduction", s.solver.reduction);
    s.solver.max_iterations = read_count(o, "solver", "max_iterations", s.solver.max_iterations);
    s.solver.gradient_tolerance = read_number(o, "solver", "gradient_tolerance", s.solver.gradient_tolerance);
    s.solver.step_tolerance = read_number(o, "solver", "step_tolerance", s.solver.step_tolerance);
    s.solver.hessian_damping = read_number(o, "solver", "hessian_damping", s.solver.hessian_damping);
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::config, "cannot open config " + file);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(Errc::config, "config " + file + ": " + e.what());
  }
  return scenario_from_json(doc);
}

Scenario apply_sweep_value(const Scenario& base, const std::string& variable, double value) {
  Scenario s = base;
  if (variable == "snr") {
    s.snr_db = value;
  } else if (variable == "k") {
    s.k_factor = value;
  } else if (variable == "rb") {
    if (!(value >= 1.0) || value != std::floor(value)) config_error("sweep.values", "RB counts must be positive integers");
    s.grid.subcarriers = 12 * static_cast<int>(value);
  } else {
    config_error("sweep.variable", "must be one of snr, k, rb");
  }
  return s;
}

// ---------------------------------------------------------------------------
// trials

double nmse_db(const CVector& h_hat, const CVector& h_true) {
  const double energy = h_true.squaredNorm();
  if (!(energy > 0.0)) throw Error(Errc::domain, "nmse: true channel is zero");
  if (h_hat.size() != h_true.size()) throw Error(Errc::dimension, "nmse: length mismatch");
  const double ratio = (h_hat - h_true).squaredNorm() / energy;
  if (!(ratio > 0.0)) return kNmseFloorDb;
  return std::max(kNmseFloorDb, 10.0 * std::log10(ratio));
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) {
  // splitmix64 finalizer applied in sequence to each coordinate
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ trial) ^ stream);
}

TrialDraw draw_trial(const Scenario& scenario, std::uint64_t trial) {
  const ArrayGeometry geom = scenario.geometry();
  const FrequencyGrid& grid = scenario.grid;
  const int L = scenario.effective_samples();

  std::mt19937_64 path_rng(substream_seed(scenario.seed, scenario.fixed_channel ? 0 : trial, 0));
  const PathSet paths = generate_paths(scenario.paths, geom.wavelength, path_rng);

  TrialDraw draw;
  draw.channel = assemble_channel(paths, geom, grid, 0.0).matrix;
  const int units = geom.units();

  std::vector<double> max_mag(static_cast<std::size_t>(units));
  double power = 0.0;
  for (int u = 0; u < units; ++u) {
    const CVector h = draw.channel.row(u).transpose();
    max_mag[static_cast<std::size_t>(u)] = max_object_magnitude(h, grid, L);
    power += mean_object_power(h, grid, L);
  }
  power /= units;
  draw.noise_variance = scenario.noiseless() ? 0.0 : noise_variance_for_snr(power, scenario.snr_db);
  const double global_max = *std::max_element(max_mag.begin(), max_mag.end());

  draw.records.reserve(static_cast<std::size_t>(units));
  for (int m = 0; m < geom.n_cols; ++m) {
    for (int n = 0; n < geom.n_rows; ++n) {
      const int u = geom.unit_index(m, n);
      const double peak = scenario.global_k ? global_max : max_mag[static_cast<std::size_t>(u)];
      // a unit with no received power still needs a usable reference
      const double amplitude = scenario.k_factor * (peak > 0.0 ? peak : 1.0);
      const auto ref = ReferenceWave::with_phase_step(amplitude, scenario.phase_step, grid);
      std::mt19937_64 noise_rng(substream_seed(scenario.seed, trial, 1 + static_cast<std::uint64_t>(u)));
      auto rec = sample_holograms(draw.channel.row(u).transpose(), grid, ref, L, draw.noise_variance, noise_rng);
      rec.unit_m = m;
      rec.unit_n = n;
      draw.records.push_back(std::move(rec));
    }
  }
  // records are stored in unit-index order
  std::sort(draw.records.begin(), draw.records.end(), [&](const HologramRecord& a, const HologramRecord& b) {
    return geom.unit_index(a.unit_m, a.unit_n) < geom.unit_index(b.unit_m, b.unit_n);
  });
  return draw;
}

TrialResult run_trial(const Scenario& scenario, std::uint64_t trial) {
  const TrialDraw draw = draw_trial(scenario, trial);
  const int L = scenario.effective_samples();

  TrialResult out;
  out.trial = trial;
  out.noise_variance = draw.noise_variance;
  for (std::size_t u = 0; u < draw.records.size(); ++u) {
    const auto& rec = draw.records[u];
    const CVector h = draw.channel.row(static_cast<Eigen::Index>(u)).transpose();
    const double energy = h.squaredNorm();

    GrowsSettings settings{L, scenario.grid, rec.reference};
    UnitOutcome g{0.0, energy, false, 0, 0};
    CVector init;
    try {
      const auto est = grows_estimate(rec, settings);
      init = est.h;
      g.squared_error = (est.h - h).squaredNorm();
      g.clamps = est.clamps;
    } catch (const Error&) {
      g.failed = true;
    }
    if (scenario.run_grows) out.grows.push_back(g);

    if (scenario.run_whml) {
      UnitOutcome w{0.0, energy, true, 0, 0};
      if (!g.failed && draw.noise_variance > 0.0) {
        try {
          const auto ctx = LikelihoodContext::from_record(rec, scenario.grid);
          const auto est = whml_estimate(init, ctx, scenario.solver);
          if (est.h.allFinite()) {
            w.squared_error = (est.h - h).squaredNorm();
            w.iterations = est.iterations;
            w.failed = false;
          }
        } catch (const Error&) {
        }
      }
      out.whml.push_back(w);
    }
  }
  return out;
}

double crlb_floor_db(const Scenario& scenario, const TrialDraw& draw) {
  if (!(draw.noise_variance > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  double acc = 0.0;
  int used = 0;
  for (std::size_t u = 0; u < draw.records.size(); ++u) {
    const CVector h = draw.channel.row(static_cast<Eigen::Index>(u)).transpose();
    if (!(h.squaredNorm() > 0.0)) continue;
    try {
      const auto ctx = LikelihoodContext::from_record(draw.records[u], scenario.grid);
      const auto m = information_matrices(h, ctx, scenario.j_mode, scenario.information_form);
      const auto report = crlb_matrix(m.info, m.pseudo);
      const Eigen::Index n = report.schur.rows();
      acc += report.bound.topLeftCorner(n, n).diagonal().real().sum() / h.squaredNorm();
      ++used;
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (used == 0) return std::numeric_limits<double>::quiet_NaN();
  return 10.0 * std::log10(acc / used);
}

std::vector<TrialResult> run_trials(const Scenario& scenario, int workers) {
  const auto n = static_cast<std::size_t>(scenario.trials);
  std::vector<TrialResult> results(n);
  workers = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(n, 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[i] = run_trial(scenario, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

namespace {

ResultRow aggregate(const std::string& name, const std::vector<TrialResult>& trials,
                    std::vector<UnitOutcome> TrialResult::*field) {
  ResultRow row;
  row.estimator = name;
  row.trials = static_cast<int>(trials.size());
  double acc = 0.0;
  long long used = 0;
  for (const auto& t : trials) {
    for (const auto& u : t.*field) {
      row.clamps += u.clamps;
      if (u.failed || !(u.energy > 0.0)) {
        if (u.failed) ++row.failures;
        continue;
      }
      acc += u.squared_error / u.energy;
      ++used;
    }
  }
  if (used > 0) {
    const double mean = acc / static_cast<double>(used);
    row.nmse_db = mean > 0.0 ? std::max(kNmseFloorDb, 10.0 * std::log10(mean)) : kNmseFloorDb;
  }
  return row;
}

}  // namespace

std::vector<ResultRow> summarize(const Scenario& scenario, const std::string& sweep_var, double value,
                                 const std::vector<TrialResult>& trials, double crlb_db) {
  std::vector<ResultRow> rows;
  if (scenario.run_grows) rows.push_back(aggregate("grows", trials, &TrialResult::grows));
  if (scenario.run_whml) rows.push_back(aggregate("whml", trials, &TrialResult::whml));
  for (auto& r : rows) {
    r.sweep_var = sweep_var;
    r.value = value;
    r.crlb_db = crlb_db;
  }
  return rows;
}

std::vector<ResultRow> run_sweep(const Scenario& scenario, const SweepOptions& options) {
  scenario.validate();
  if (options.log) {
    for (const auto& w : scenario.warnings()) *options.log << "warning: " << w << '\n';
  }
  std::string variable = scenario.sweep_variable;
  std::vector<double> values = scenario.sweep_values;
  if (variable.empty()) {
    variable = "snr";
    values = {scenario.snr_db};
  }

  std::vector<ResultRow> rows;
  for (double v : values) {
    const Scenario point = apply_sweep_value(scenario, variable, v);
    point.validate();
    const auto trials = run_trials(point, options.workers);
    double crlb = std::numeric_limits<double>::quiet_NaN();
    if (point.run_crlb) crlb = crlb_floor_db(point, draw_trial(point, 0));
    auto point_rows = summarize(point, variable, v, trials, crlb);
    if (options.log) {
      for (const auto& r : point_rows) {
        *options.log << variable << '=' << v << ' ' << r.estimator << " nmse_db=" << r.nmse_db
                     << " crlb_db=" << r.crlb_db << " failures=" << r.failures << " clamps=" << r.clamps << '\n';
      }
    }
    rows.insert(rows.end(), point_rows.begin(), point_rows.end());
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  auto num = [](double x) -> std::string {
    if (std::isnan(x)) return "";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
  };
  auto value = [](double x) -> std::string {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
  };
  out << "sweep_var,value,estimator,nmse_db,crlb_db,trials,failures,clamps\n";
  for (const auto& r : rows) {
    out << r.sweep_var << ',' << value(r.value) << ',' << r.estimator << ',' << num(r.nmse_db) << ','
        << num(r.crlb_db) << ',' << r.trials << ',' << r.failures << ',' << r.clamps << '\n';
  }
}

}  // namespace holowb
