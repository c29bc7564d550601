#include "w99sim/config.hpp"

#include "w99sim/errors.hpp"
#include "w99sim/io.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <initializer_list>

namespace w99sim::config
{

namespace
{

using nlohmann::json;

void expect_keys(const json & j, const std::string & path, std::initializer_list<std::string_view> keys)
{
  if (!j.is_object()) {
    throw ParseError(fmt::format("{}: expected an object", path));
  }
  for (const auto & [key, value] : j.items()) {
    bool known = false;
    for (auto k : keys) {
      known = known || key == k;
    }
    if (!known) {
      throw ParseError(fmt::format("{}.{}: unknown field", path, key));
    }
  }
}

void read_number(const json & j, const std::string & path, const char * key, double & out)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & v = j.at(key);
  if (!v.is_number()) {
    throw ParseError(fmt::format("{}.{}: expected a number", path, key));
  }
  out = v.get<double>();
}

void read_bool(const json & j, const std::string & path, const char * key, bool & out)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & v = j.at(key);
  if (!v.is_boolean()) {
    throw ParseError(fmt::format("{}.{}: expected a boolean", path, key));
  }
  out = v.get<bool>();
}

template <typename Int>
void read_unsigned(const json & j, const std::string & path, const char * key, Int & out)
{
  if (!j.contains(key)) {
    return;
  }
  const auto & v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ParseError(fmt::format("{}.{}: expected a non-negative integer", path, key));
  }
  out = static_cast<Int>(v.get<std::uint64_t>());
}

void read_w99(const json & j, const std::string & path, carfollow::W99Params & p)
{
  expect_keys(j, path, {"cc0", "cc1", "cc2", "cc3", "cc4", "cc5", "cc6", "cc7", "cc8", "cc9"});
  for (std::size_t i = 0; i < carfollow::W99Params::kCount; ++i) {
    double value = p.get(i);
    read_number(j, path, std::string(carfollow::param_name(i)).c_str(), value);
    p.set(i, value);
  }
}

void read_theta(const json & j, const std::string & path, calib::Theta & out)
{
  if (!j.is_array() || j.size() != out.size()) {
    throw ParseError(fmt::format("{}: expected an array of {} numbers", path, out.size()));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(fmt::format("{}[{}]: expected a number", path, i));
    }
    out[i] = j[i].get<double>();
  }
}

void read_class(const json & j, const std::string & path, sim::ClassSpec & spec)
{
  expect_keys(j, path, {"volume_veh_h", "length_m", "width_m", "desired_speed", "w99"});
  read_number(j, path, "volume_veh_h", spec.volume_veh_h);
  read_number(j, path, "length_m", spec.length_m);
  read_number(j, path, "width_m", spec.width_m);
  if (j.contains("desired_speed")) {
    const auto & d = j.at("desired_speed");
    const std::string dpath = path + ".desired_speed";
    expect_keys(d, dpath, {"mu_kmh", "sigma_kmh"});
    read_number(d, dpath, "mu_kmh", spec.desired.mu_kmh);
    read_number(d, dpath, "sigma_kmh", spec.desired.sigma_kmh);
  }
  if (j.contains("w99")) {
    read_w99(j.at("w99"), path + ".w99", spec.w99);
  }
}

}  // namespace

AppConfig parse_config(std::string_view text)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error & e) {
    throw ParseError(fmt::format("$: malformed JSON: {}", e.what()));
  }
  expect_keys(
    root, "$",
    {"network", "w99", "classes", "lane_change", "altered", "dt_s", "warmup_s", "horizon_s", "seed",
     "jam_timeout_s", "kde", "calibration", "sensitivity"});

  AppConfig cfg;
  sim::SimConfig & s = cfg.sim;

  if (root.contains("network")) {
    const auto & n = root.at("network");
    expect_keys(n, "$.network", {"lanes", "mainline_length_m", "inflow_length_m", "lane_width_m"});
    int lanes = s.network.lane_count;
    double mainline = s.network.mainline_length;
    double inflow = s.network.inflow_length;
    double width = s.network.lane_width;
    read_unsigned(n, "$.network", "lanes", lanes);
    read_number(n, "$.network", "mainline_length_m", mainline);
    read_number(n, "$.network", "inflow_length_m", inflow);
    read_number(n, "$.network", "lane_width_m", width);
    s.network = roadnet::build_highway(lanes, mainline, inflow, width);
  }

  if (root.contains("w99")) {
    carfollow::W99Params p = s.car.w99;
    read_w99(root.at("w99"), "$.w99", p);
    s.car.w99 = p;
    s.truck.w99 = p;
  }

  if (root.contains("classes")) {
    const auto & c = root.at("classes");
    expect_keys(c, "$.classes", {"car", "truck"});
    if (c.contains("car")) {
      read_class(c.at("car"), "$.classes.car", s.car);
    }
    if (c.contains("truck")) {
      read_class(c.at("truck"), "$.classes.truck", s.truck);
    }
  }

  if (root.contains("lane_change")) {
    const auto & l = root.at("lane_change");
    expect_keys(l, "$.lane_change", {"enabled", "keep_right", "desire_threshold_kmh", "cooldown_s", "accepted_decel_own_mps2",
       "accepted_decel_follower_mps2"});
    read_bool(l, "$.lane_change", "enabled", s.lane_change.enabled);
    read_bool(l, "$.lane_change", "keep_right", s.lane_change.keep_right);
    read_number(l, "$.lane_change", "desire_threshold_kmh", s.lane_change.desire_threshold_kmh);
    read_number(l, "$.lane_change", "cooldown_s", s.lane_change.cooldown_s);
    read_number(l, "$.lane_change", "accepted_decel_own_mps2", s.lane_change.accepted_decel_own);
    read_number(
      l, "$.lane_change", "accepted_decel_follower_mps2", s.lane_change.accepted_decel_follower);
  }

  if (root.contains("altered")) {
    const auto & a = root.at("altered");
    expect_keys(a, "$.altered", {"fraction", "w99"});
    sim::AlteredSubset altered{0.0, s.car.w99};
    read_number(a, "$.altered", "fraction", altered.fraction);
    if (a.contains("w99")) {
      read_w99(a.at("w99"), "$.altered.w99", altered.w99);
    }
    s.altered = altered;
  }

  read_number(root, "$", "dt_s", s.dt);
  read_number(root, "$", "warmup_s", s.warmup);
  read_number(root, "$", "horizon_s", s.horizon);
  read_unsigned(root, "$", "seed", s.seed);
  read_number(root, "$", "jam_timeout_s", s.jam_timeout);

  if (root.contains("kde")) {
    const auto & k = root.at("kde");
    expect_keys(k, "$.kde", {"bandwidth"});
    if (k.contains("bandwidth")) {
      double h = 0.0;
      read_number(k, "$.kde", "bandwidth", h);
      if (!(h > 0.0)) {
        throw ConfigError(fmt::format("kde.bandwidth must be positive, got {}", h));
      }
      cfg.kde_bandwidth = h;
    }
  }

  if (root.contains("calibration")) {
    const auto & c = root.at("calibration");
    const std::string path = "$.calibration";
    expect_keys(c, path, {"eval_seed", "lower", "upper", "max_iterations", "xatol", "fatol", "simplex_fraction"});
    auto & cal = cfg.calibration;
    read_unsigned(c, path, "eval_seed", cal.eval_seed);
    if (c.contains("lower")) {
      read_theta(c.at("lower"), path + ".lower", cal.bounds.lower);
    }
    if (c.contains("upper")) {
      read_theta(c.at("upper"), path + ".upper", cal.bounds.upper);
    }
    read_unsigned(c, path, "max_iterations", cal.optimizer.max_iterations);
    read_number(c, path, "xatol", cal.optimizer.xatol);
    read_number(c, path, "fatol", cal.optimizer.fatol);
    read_number(c, path, "simplex_fraction", cal.simplex_fraction);
    if (!(cal.simplex_fraction > 0.0 && cal.simplex_fraction <= 1.0)) {
      throw ConfigError(fmt::format("calibration.simplex_fraction must lie in (0, 1], got {}", cal.simplex_fraction));
    }
  }

  if (root.contains("sensitivity")) {
    const auto & w = root.at("sensitivity");
    const std::string path = "$.sensitivity";
    expect_keys(w, path, {"altered_fraction", "warmup_s", "duration_s"});
    read_number(w, path, "altered_fraction", cfg.sensitivity.altered_fraction);
    read_number(w, path, "warmup_s", cfg.sensitivity.warmup_s);
    read_number(w, path, "duration_s", cfg.sensitivity.duration_s);
    if (!(cfg.sensitivity.duration_s > 0.0) || cfg.sensitivity.warmup_s < 0.0) {
      throw ConfigError("sensitivity: duration_s must be positive and warmup_s non-negative");
    }
  }

  s.validate();
  return cfg;
}

AppConfig load_config(const std::string & path)
{
  return parse_config(io::read_file(path));
}

calib::CalibrationProblem calibration_problem(
  const AppConfig & config, const trajdata::ObservedSpeeds & observed)
{
  calib::CalibrationProblem problem;
  problem.observed = observed;
  problem.base = config.sim;
  problem.bounds = config.calibration.bounds;
  problem.eval_seed = config.calibration.eval_seed;
  problem.bandwidth = config.kde_bandwidth;
  problem.optimizer = config.calibration.optimizer;
  problem.simplex_fraction = config.calibration.simplex_fraction;
  problem.validate();
  return problem;
}

sim::SimConfig sensitivity_base(const AppConfig & config)
{
  sim::SimConfig base = config.sim;
  base.altered.reset();
  base.warmup = config.sensitivity.warmup_s;
  base.horizon = config.sensitivity.warmup_s + config.sensitivity.duration_s;
  return base;
}

}  // namespace w99sim::config
