#pragma once

#include "w99sim/calib.hpp"
#include "w99sim/sim.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace w99sim::config
{

struct CalibrationSettings
{
  std::uint64_t eval_seed = 1;
  calib::Bounds bounds;
  calib::NelderMeadOptions optimizer = calib::calibration_optimizer();
  double simplex_fraction = 0.1;
};

struct SensitivitySettings
{
  double altered_fraction = 0.2;
  double warmup_s = 600.0;
  double duration_s = 1200.0;  ///< simulated time after warm-up
};

struct AppConfig
{
  sim::SimConfig sim;
  std::optional<double> kde_bandwidth;
  CalibrationSettings calibration;
  SensitivitySettings sensitivity;
};

/// Parses a JSON configuration document. Every section and field is
/// optional; missing values keep their defaults. Unknown keys and wrong types
/// raise ParseError naming the JSON path; invalid values raise ConfigError.
///
/// {
///   "network": {"lanes", "mainline_length_m", "inflow_length_m", "lane_width_m"},
///   "w99": {"cc0" .. "cc9"},                      // both classes
///   "classes": {"car"|"truck": {"volume_veh_h", "length_m", "width_m",
///               "desired_speed": {"mu_kmh", "sigma_kmh"}, "w99": {...}}},
///   "lane_change": {"enabled", "keep_right", "desire_threshold_kmh", "cooldown_s",
///                   "accepted_decel_own_mps2", "accepted_decel_follower_mps2"},
///   "altered": {"fraction", "w99": {...}},
///   "dt_s", "warmup_s", "horizon_s", "seed", "jam_timeout_s",
///   "kde": {"bandwidth"},
///   "calibration": {"eval_seed", "lower": [4], "upper": [4],
///                   "max_iterations", "xatol", "fatol", "simplex_fraction"},
///   "sensitivity": {"altered_fraction", "warmup_s", "duration_s"}
/// }
AppConfig parse_config(std::string_view text);

/// Reads and parses a file; an unreadable file raises ParseError.
AppConfig load_config(const std::string & path);

/// Calibration problem assembled from the config and observed speeds.
calib::CalibrationProblem calibration_problem(
  const AppConfig & config, const trajdata::ObservedSpeeds & observed);

/// Sweep base configuration: sensitivity horizon applied to the sim config.
sim::SimConfig sensitivity_base(const AppConfig & config);

}  // namespace w99sim::config
