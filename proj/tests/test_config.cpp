#include "w99sim/config.hpp"
#include "w99sim/errors.hpp"

#include <gtest/gtest.h>

namespace w99sim::config
{
namespace
{

TEST(Config, EmptyDocumentKeepsDefaults)
{
  const auto cfg = parse_config("{}");
  EXPECT_EQ(cfg.sim.network.lane_count, 3);
  EXPECT_DOUBLE_EQ(cfg.sim.car.volume_veh_h, 1680.0);
  EXPECT_DOUBLE_EQ(cfg.sim.truck.volume_veh_h, 320.0);
  EXPECT_DOUBLE_EQ(cfg.sim.dt, 0.1);
  EXPECT_FALSE(cfg.kde_bandwidth.has_value());
  EXPECT_DOUBLE_EQ(cfg.sensitivity.altered_fraction, 0.2);
}

TEST(Config, FullDocument)
{
  const auto cfg = parse_config(R"({
    "network": {"lanes": 2, "mainline_length_m": 2000, "inflow_length_m": 300, "lane_width_m": 3.75},
    "w99": {"cc1": 1.2, "cc3": -6},
    "classes": {
      "car": {"volume_veh_h": 1000, "desired_speed": {"mu_kmh": 131.05, "sigma_kmh": 17.48}},
      "truck": {"length_m": 18, "w99": {"cc0": 2.0}}
    },
    "lane_change": {"enabled": true, "keep_right": false, "desire_threshold_kmh": 15,
                    "cooldown_s": 4, "accepted_decel_own_mps2": 2.5},
    "altered": {"fraction": 0.1, "w99": {"cc1": 0.3}},
    "dt_s": 0.05, "warmup_s": 100, "horizon_s": 500, "seed": 12345678901234, "jam_timeout_s": 60,
    "kde": {"bandwidth": 1.0},
    "calibration": {"eval_seed": 3, "lower": [90, 2, 65, 2], "upper": [180, 30, 110, 15],
                    "max_iterations": 200, "xatol": 0.01, "fatol": 1e-5, "simplex_fraction": 0.2},
    "sensitivity": {"altered_fraction": 0.5, "warmup_s": 300, "duration_s": 900}
  })");
  const auto & s = cfg.sim;
  EXPECT_EQ(s.network.lane_count, 2);
  EXPECT_DOUBLE_EQ(s.network.lane_width, 3.75);
  EXPECT_DOUBLE_EQ(s.car.w99.cc1, 1.2);
  EXPECT_DOUBLE_EQ(s.truck.w99.cc3, -6.0);
  EXPECT_DOUBLE_EQ(s.truck.w99.cc0, 2.0);
  EXPECT_DOUBLE_EQ(s.car.w99.cc0, 1.5);
  EXPECT_DOUBLE_EQ(s.car.desired.mu_kmh, 131.05);
  EXPECT_DOUBLE_EQ(s.truck.length_m, 18.0);
  EXPECT_FALSE(s.lane_change.keep_right);
  EXPECT_DOUBLE_EQ(s.lane_change.accepted_decel_own, 2.5);
  ASSERT_TRUE(s.altered.has_value());
  EXPECT_DOUBLE_EQ(s.altered->w99.cc1, 0.3);
  EXPECT_DOUBLE_EQ(s.altered->w99.cc3, -6.0);
  EXPECT_EQ(s.seed, 12345678901234u);
  EXPECT_DOUBLE_EQ(*cfg.kde_bandwidth, 1.0);
  EXPECT_EQ(cfg.calibration.eval_seed, 3u);
  EXPECT_DOUBLE_EQ(cfg.calibration.bounds.upper[3], 15.0);
  EXPECT_EQ(cfg.calibration.optimizer.max_iterations, 200);

  const auto base = sensitivity_base(cfg);
  EXPECT_DOUBLE_EQ(base.warmup, 300.0);
  EXPECT_DOUBLE_EQ(base.horizon, 1200.0);
  EXPECT_FALSE(base.altered.has_value());

  const auto problem = calibration_problem(cfg, {{120.0, 130.0}, {}});
  EXPECT_EQ(problem.eval_seed, 3u);
  EXPECT_DOUBLE_EQ(*problem.bandwidth, 1.0);
  EXPECT_DOUBLE_EQ(problem.simplex_fraction, 0.2);
  EXPECT_DOUBLE_EQ(problem.optimizer.fatol, 1e-5);
}

TEST(Config, UnknownKeysAndWrongTypes)
{
  EXPECT_THROW(parse_config(R"({"netwrok": {}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"w99": {"cc10": 1}})"), ParseError);
  EXPECT_THROW(parse_config(R"({"dt_s": "fast"})"), ParseError);
  EXPECT_THROW(parse_config(R"({"seed": -1})"), ParseError);
  EXPECT_THROW(parse_config(R"({"calibration": {"lower": [1, 2]}})"), ParseError);
  EXPECT_THROW(parse_config("not json"), ParseError);
  try {
    parse_config(R"({"classes": {"car": {"desired_speed": {"mu": 1}}}})");
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_NE(std::string(e.what()).find("$.classes.car.desired_speed.mu"), std::string::npos) << e.what();
  }
}

TEST(Config, InvalidValues)
{
  EXPECT_THROW(parse_config(R"({"network": {"lanes": 0}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"w99": {"cc3": 2}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"dt_s": 0})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"kde": {"bandwidth": -1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"calibration": {"simplex_fraction": 0}})"), ConfigError);
}

TEST(Config, UnreadableFile)
{
  EXPECT_THROW(load_config("/nonexistent/config.json"), ParseError);
}

}  // namespace
}  // namespace w99sim::config
