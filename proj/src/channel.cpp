#include "holowb/channel.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "holowb/error.hpp"

namespace holowb {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double deg) { return deg * kPi / 180.0; }

// Reflect into [0, pi].
double wrap_zenith(double theta) {
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta < 0.0) theta += 2.0 * kPi;
  return theta > kPi ? 2.0 * kPi - theta : theta;
}

double wrap_azimuth(double phi) { return std::remainder(phi, 2.0 * kPi); }

}  // namespace

void ArrayGeometry::validate() const {
  if (n_rows <= 0 || n_cols <= 0) throw Error(Errc::config, "array geometry: row and column counts must be positive");
  if (!(spacing_v > 0.0) || !(spacing_h > 0.0)) throw Error(Errc::config, "array geometry: unit spacing must be positive");
  if (!(wavelength > 0.0)) throw Error(Errc::config, "array geometry: wavelength must be positive");
}

ArrayGeometry ArrayGeometry::half_wavelength(int n_rows, int n_cols, double carrier_hz) {
  const double lambda = kSpeedOfLight / carrier_hz;
  return ArrayGeometry{n_rows, n_cols, 0.5 * lambda, 0.5 * lambda, lambda};
}

void FrequencyGrid::validate() const {
  if (!(carrier_hz > 0.0)) throw Error(Errc::config, "frequency grid: carrier must be positive");
  if (subcarriers <= 0) throw Error(Errc::config, "frequency grid: subcarrier count must be positive");
  if (!(symbol_period_s > 0.0)) throw Error(Errc::config, "frequency grid: symbol period must be positive");
}

double PathSet::total_power() const {
  return std::accumulate(paths.begin(), paths.end(), 0.0,
                         [](double acc, const Path& p) { return acc + std::norm(p.amplitude); });
}

CVector steering_vector(const ArrayGeometry& geom, double zoa, double aoa) {
  const double step_h = geom.spacing_h * std::sin(zoa) * std::sin(aoa) / geom.wavelength;
  const double step_v = geom.spacing_v * std::cos(zoa) / geom.wavelength;
  CVector a(geom.units());
  for (int m = 0; m < geom.n_cols; ++m) {
    for (int n = 0; n < geom.n_rows; ++n) {
      a(geom.unit_index(m, n)) = phasor(m * step_h + n * step_v);
    }
  }
  return a;
}

CVector delay_response(double delay_s, const FrequencyGrid& grid) {
  CVector b(grid.subcarriers);
  for (int k = 0; k < grid.subcarriers; ++k) b(k) = phasor_product(-grid.frequency(k), delay_s);
  return b;
}

cplx doppler_coefficient(const Path& path, double t) {
  return path.amplitude * phasor_product(path.doppler_hz, t);
}

ChannelSnapshot assemble_channel(const PathSet& paths, const ArrayGeometry& geom,
                                 const FrequencyGrid& grid, double t) {
  if (paths.paths.empty()) throw Error(Errc::config, "assemble_channel: empty path set");
  geom.validate();
  grid.validate();
  const auto count = static_cast<Eigen::Index>(paths.size());
  CMatrix steering(geom.units(), count);
  CMatrix delays(count, grid.subcarriers);
  CVector coeffs(count);
  for (Eigen::Index p = 0; p < count; ++p) {
    const Path& path = paths.paths[static_cast<std::size_t>(p)];
    steering.col(p) = steering_vector(geom, path.zoa_rad, path.aoa_rad);
    delays.row(p) = delay_response(path.delay_s, grid).transpose();
    coeffs(p) = doppler_coefficient(path, t);
  }
  return ChannelSnapshot{steering * coeffs.asDiagonal() * delays, t};
}

double doppler_from_velocity(double zoa, double aoa, double speed, double velocity_zoa,
                             double velocity_aoa, double wavelength) {
  const double rx = std::sin(zoa) * std::cos(aoa);
  const double ry = std::sin(zoa) * std::sin(aoa);
  const double rz = std::cos(zoa);
  const double vx = speed * std::sin(velocity_zoa) * std::cos(velocity_aoa);
  const double vy = speed * std::sin(velocity_zoa) * std::sin(velocity_aoa);
  const double vz = speed * std::cos(velocity_zoa);
  return (rx * vx + ry * vy + rz * vz) / wavelength;
}

void PathConfig::validate() const {
  if (clusters <= 0) throw Error(Errc::config, "paths.clusters must be positive");
  if (rays <= 0) throw Error(Errc::config, "paths.rays must be positive");
  if (!cluster_powers.empty()) {
    if (static_cast<int>(cluster_powers.size()) != clusters)
      throw Error(Errc::config, "paths.cluster_powers must have one entry per cluster");
    for (double p : cluster_powers)
      if (!(p > 0.0)) throw Error(Errc::config, "paths.cluster_powers entries must be positive");
  }
  if (!(total_power > 0.0)) throw Error(Errc::config, "paths.total_power must be positive");
  if (zoa_spread_deg < 0.0 || aoa_spread_deg < 0.0)
    throw Error(Errc::config, "paths angular spreads must be nonnegative");
  if (delay_spread_s < 0.0) throw Error(Errc::config, "paths.delay_spread_s must be nonnegative");
}

PathSet generate_paths(const PathConfig& config, double wavelength, std::mt19937_64& rng) {
  config.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> weights = config.cluster_powers;
  if (weights.empty()) weights.assign(static_cast<std::size_t>(config.clusters), 1.0);
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);

  PathSet out;
  out.ue_speed = config.ue_speed;
  out.velocity_zoa = config.velocity_zoa;
  out.velocity_aoa = config.velocity_aoa;
  out.paths.reserve(static_cast<std::size_t>(config.clusters * config.rays));

  const double zoa_spread = deg2rad(config.zoa_spread_deg);
  const double aoa_spread = deg2rad(config.aoa_spread_deg);
  for (int c = 0; c < config.clusters; ++c) {
    const double zoa_mean = kPi * unit(rng);
    const double aoa_mean = kPi * (2.0 * unit(rng) - 1.0);
    // -mean * log(U) with U in (0, 1]
    const double delay = -config.delay_spread_s * std::log(1.0 - unit(rng));
    const double ray_power =
        config.total_power * weights[static_cast<std::size_t>(c)] / weight_sum / config.rays;
    for (int r = 0; r < config.rays; ++r) {
      Path p;
      p.zoa_rad = wrap_zenith(zoa_mean + zoa_spread * gauss(rng));
      p.aoa_rad = wrap_azimuth(aoa_mean + aoa_spread * gauss(rng));
      p.delay_s = delay;
      p.amplitude = std::polar(std::sqrt(ray_power), kTwoPi * unit(rng));
      p.doppler_hz = doppler_from_velocity(p.zoa_rad, p.aoa_rad, config.ue_speed,
                                           config.velocity_zoa, config.velocity_aoa, wavelength);
      out.paths.push_back(p);
    }
  }

  // Equal split is exact up to rounding; rescale so the total is pinned.
  const double scale = std::sqrt(config.total_power / out.total_power());
  for (auto& p : out.paths) p.amplitude *= scale;
  return out;
}

nlohmann::json paths_to_json(const PathSet& paths) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& p : paths.paths) {
    doc.push_back({{"delay_s", p.delay_s},
                   {"beta_re", p.amplitude.real()},
                   {"beta_im", p.amplitude.imag()},
                   {"zoa_rad", p.zoa_rad},
                   {"aoa_rad", p.aoa_rad},
                   {"doppler_hz", p.doppler_hz}});
  }
  return doc;
}

PathSet paths_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw Error(Errc::config, "path set: expected a JSON array");
  PathSet out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    auto field = [&](const char* key) -> double {
      if (!item.contains(key) || !item[key].is_number()) {
        throw Error(Errc::config, "path set: [" + std::to_string(i) + "]." + key + " missing or not a number");
      }
      return item[key].get<double>();
    };
    Path p;
    p.delay_s = field("delay_s");
    p.amplitude = cplx(field("beta_re"), field("beta_im"));
    p.zoa_rad = field("zoa_rad");
    p.aoa_rad = field("aoa_rad");
    p.doppler_hz = field("doppler_hz");
    if (p.delay_s < 0.0) throw Error(Errc::config, "path set: [" + std::to_string(i) + "].delay_s negative");
    out.paths.push_back(p);
  }
  if (out.paths.empty()) throw Error(Errc::config, "path set: no paths");
  return out;
}

PathSet load_paths(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::config, "cannot open path file " + file);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config, "path file " + file + ": " + e.what());
  }
  return paths_from_json(doc);
}

void save_paths(const PathSet& paths, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw Error(Errc::config, "cannot write path file " + file);
  out << paths_to_json(paths).dump(2) << '\n';
}

}  // namespace holowb
