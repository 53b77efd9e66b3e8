#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hetnet/errors.hpp"

namespace hetnet {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

/// Log-distance pathloss PL(dB) = intercept + slope * log10(d / 1 km).
struct PathlossModel {
  double intercept_db = 0.0;
  double slope_db = 0.0;

  double loss_db(double distance_m) const {
    return intercept_db + slope_db * std::log10(distance_m / 1000.0);
  }
  double gain(double distance_m) const { return std::pow(10.0, -loss_db(distance_m) / 10.0); }
};

/// Scalar parameters of one scenario. Every power is in watts here.
struct ScenarioConfig {
  int num_small_cells = 5;     // J
  int users_per_cell = 5;      // K
  int antenna_array = 100;     // N
  int beamforming_group = 20;  // B
  double macro_tx_power_total = dbm_to_watts(33.0);
  double per_antenna_power = dbm_to_watts(33.0) / 20.0;  // P0, defaults to total / B
  double circuit_power = dbm_to_watts(20.0);             // Pc
  double max_user_power = dbm_to_watts(20.0);            // Pmax
  double qos_rate = 0.01;                                // Rt, bits/s/Hz
  double noise_power = 3.9811e-14;                       // sigma^2
  double macro_radius = 500.0;
  double small_cell_radius = 10.0;
  double min_macro_distance = 50.0;
  double min_intercell_distance = 40.0;
  double shadowing_stddev = 10.0;  // dB
  std::uint64_t rng_seed = 1;

  PathlossModel macro_pathloss{128.1, 37.6};
  PathlossModel small_cell_pathloss{140.7, 36.7};
  /// Macro -> small cell BS (wireless backhaul) link.
  PathlossModel backhaul_pathloss{100.7, 23.5};
  double backhaul_shadowing_stddev = 6.0;  // dB
  /// Links shorter than this use the pathloss at this distance.
  double min_link_distance = 1.0;
  /// Test switch; false replaces the exponential fading factor with 1.
  bool rayleigh_fading = true;

  std::size_t J() const { return static_cast<std::size_t>(num_small_cells); }
  std::size_t K() const { return static_cast<std::size_t>(users_per_cell); }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("invalid scenario config: ") + what);
    };
    require(num_small_cells >= 1, "num_small_cells must be >= 1");
    require(users_per_cell >= 1, "users_per_cell must be >= 1");
    require(antenna_array > beamforming_group, "antenna_array must exceed beamforming_group");
    require(beamforming_group >= num_small_cells, "beamforming_group must be >= num_small_cells");
    for (double p : {macro_tx_power_total, per_antenna_power, circuit_power, max_user_power,
                     noise_power}) {
      require(std::isfinite(p) && p > 0.0, "powers must be positive and finite");
    }
    require(std::isfinite(qos_rate) && qos_rate >= 0.0, "qos_rate must be >= 0");
    for (double d : {macro_radius, small_cell_radius, min_macro_distance, min_intercell_distance,
                     min_link_distance}) {
      require(std::isfinite(d) && d > 0.0, "radii and distances must be positive");
    }
    require(min_macro_distance + small_cell_radius < macro_radius,
            "min_macro_distance + small_cell_radius must be below macro_radius");
    require(std::isfinite(shadowing_stddev) && shadowing_stddev >= 0.0,
            "shadowing_stddev must be >= 0");
    require(std::isfinite(backhaul_shadowing_stddev) && backhaul_shadowing_stddev >= 0.0,
            "backhaul_shadowing_stddev must be >= 0");
  }
};

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

inline void read_dbm(const nlohmann::json& j, const char* key, double& out_watts) {
  if (auto it = j.find(key); it != j.end()) out_watts = dbm_to_watts(it->get<double>());
}

inline void read_pathloss(const nlohmann::json& j, const char* key, PathlossModel& out) {
  if (auto it = j.find(key); it != j.end()) {
    read_opt(*it, "intercept_db", out.intercept_db);
    read_opt(*it, "slope_db", out.slope_db);
  }
}

} // namespace detail

/// Parses a scenario from JSON. Missing keys keep their defaults. Transmit and
/// circuit powers are read in dBm, noise_power in watts. per_antenna_power
/// defaults to macro_tx_power_total / B.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  ScenarioConfig cfg;
  try {
    detail::read_opt(j, "num_small_cells", cfg.num_small_cells);
    detail::read_opt(j, "users_per_cell", cfg.users_per_cell);
    detail::read_opt(j, "antenna_array", cfg.antenna_array);
    detail::read_opt(j, "beamforming_group", cfg.beamforming_group);
    detail::read_dbm(j, "macro_tx_power_total", cfg.macro_tx_power_total);
    cfg.per_antenna_power = cfg.macro_tx_power_total / cfg.beamforming_group;
    detail::read_dbm(j, "per_antenna_power", cfg.per_antenna_power);
    detail::read_dbm(j, "circuit_power", cfg.circuit_power);
    detail::read_dbm(j, "max_user_power", cfg.max_user_power);
    detail::read_opt(j, "qos_rate", cfg.qos_rate);
    detail::read_opt(j, "noise_power", cfg.noise_power);
    detail::read_opt(j, "macro_radius", cfg.macro_radius);
    detail::read_opt(j, "small_cell_radius", cfg.small_cell_radius);
    detail::read_opt(j, "min_macro_distance", cfg.min_macro_distance);
    detail::read_opt(j, "min_intercell_distance", cfg.min_intercell_distance);
    detail::read_opt(j, "shadowing_stddev", cfg.shadowing_stddev);
    detail::read_opt(j, "rng_seed", cfg.rng_seed);
    detail::read_pathloss(j, "macro_pathloss", cfg.macro_pathloss);
    detail::read_pathloss(j, "small_cell_pathloss", cfg.small_cell_pathloss);
    detail::read_pathloss(j, "backhaul_pathloss", cfg.backhaul_pathloss);
    detail::read_opt(j, "backhaul_shadowing_stddev", cfg.backhaul_shadowing_stddev);
    detail::read_opt(j, "min_link_distance", cfg.min_link_distance);
    detail::read_opt(j, "rayleigh_fading", cfg.rayleigh_fading);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
  auto pl = [](const PathlossModel& m) {
    return nlohmann::json{{"intercept_db", m.intercept_db}, {"slope_db", m.slope_db}};
  };
  return {
      {"num_small_cells", cfg.num_small_cells},
      {"users_per_cell", cfg.users_per_cell},
      {"antenna_array", cfg.antenna_array},
      {"beamforming_group", cfg.beamforming_group},
      {"macro_tx_power_total", watts_to_dbm(cfg.macro_tx_power_total)},
      {"per_antenna_power", watts_to_dbm(cfg.per_antenna_power)},
      {"circuit_power", watts_to_dbm(cfg.circuit_power)},
      {"max_user_power", watts_to_dbm(cfg.max_user_power)},
      {"qos_rate", cfg.qos_rate},
      {"noise_power", cfg.noise_power},
      {"macro_radius", cfg.macro_radius},
      {"small_cell_radius", cfg.small_cell_radius},
      {"min_macro_distance", cfg.min_macro_distance},
      {"min_intercell_distance", cfg.min_intercell_distance},
      {"shadowing_stddev", cfg.shadowing_stddev},
      {"rng_seed", cfg.rng_seed},
      {"macro_pathloss", pl(cfg.macro_pathloss)},
      {"small_cell_pathloss", pl(cfg.small_cell_pathloss)},
      {"backhaul_pathloss", pl(cfg.backhaul_pathloss)},
      {"backhaul_shadowing_stddev", cfg.backhaul_shadowing_stddev},
      {"min_link_distance", cfg.min_link_distance},
      {"rayleigh_fading", cfg.rayleigh_fading},
  };
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json_file(path));
}

} // namespace hetnet
