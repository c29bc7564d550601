#include "w99sim/errors.hpp"
#include "w99sim/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace w99sim::sim
{
namespace
{

SimConfig short_config(double warmup, double horizon)
{
  SimConfig c;
  c.warmup = warmup;
  c.horizon = horizon;
  return c;
}

TEST(DesiredSpeed, InverseCdfSampling)
{
  const DesiredSpeedDistribution d{120.0, 15.0};
  EXPECT_NEAR(d.sample_kmh(0.5), 120.0, 1e-9);
  EXPECT_NEAR(d.sample_kmh(0.8413447460685429), 135.0, 0.01);  // truncation barely moves the 1-sigma point
  EXPECT_GE(d.sample_kmh(0.0), 60.0);
  EXPECT_LE(d.sample_kmh(1.0 - 1e-17), 180.0);
  double previous = 0.0;
  for (double u = 0.0; u < 1.0; u += 0.01) {
    const double v = d.sample_kmh(u);
    EXPECT_GE(v, previous);
    previous = v;
  }
}

TEST(DesiredSpeed, WideSigmaStaysTruncated)
{
  const DesiredSpeedDistribution d{100.0, 200.0};
  for (double u = 0.0; u < 1.0; u += 0.001) {
    const double v = d.sample_kmh(u);
    EXPECT_GE(v, 50.0);
    EXPECT_LE(v, 150.0);
  }
}

TEST(Config, Validation)
{
  EXPECT_NO_THROW(SimConfig{}.validate());
  SimConfig c;
  c.dt = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SimConfig{};
  c.car.desired.sigma_kmh = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SimConfig{};
  c.truck.volume_veh_h = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SimConfig{};
  c.car.w99.cc3 = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(Engine{c}, ConfigError);
}

TEST(Arrivals, ZeroVolumeNeverSpawns)
{
  SimConfig c;
  c.car.volume_veh_h = 0.0;
  c.truck.volume_veh_h = 0.0;
  ArrivalProcess arrivals(c, 3);
  EXPECT_TRUE(arrivals.arrivals_until(1e6).empty());
}

TEST(Arrivals, PoissonCountBound)
{
  SimConfig c;
  c.car.volume_veh_h = 3600.0;
  c.truck.volume_veh_h = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ArrivalProcess arrivals(c, seed);
    const auto n = arrivals.arrivals_until(1000.0).size();
    EXPECT_GE(n, 900u) << "seed " << seed;
    EXPECT_LE(n, 1100u) << "seed " << seed;
  }
}

TEST(Arrivals, ClassShareFollowsVolumes)
{
  const SimConfig c;
  ArrivalProcess arrivals(c, 42);
  const auto all = arrivals.arrivals_until(3600.0);
  const auto cars = std::count_if(all.begin(), all.end(), [](const PendingVehicle & p) {
    return p.cls == VehicleClass::kCar;
  });
  const double share = static_cast<double>(cars) / static_cast<double>(all.size());
  EXPECT_NEAR(share, 0.84, 0.02);
}

TEST(Arrivals, OrderedAndUniqueIds)
{
  const SimConfig c;
  ArrivalProcess arrivals(c, 9);
  auto first = arrivals.arrivals_until(100.0);
  auto second = arrivals.arrivals_until(200.0);
  first.insert(first.end(), second.begin(), second.end());
  for (std::size_t i = 1; i < first.size(); ++i) {
    EXPECT_LE(first[i - 1].arrival, first[i].arrival);
    EXPECT_NE(first[i - 1].id, first[i].id);
  }
  for (const auto & p : first) {
    EXPECT_GE(p.draw, 0.0);
    EXPECT_LE(p.draw, 1.0);
  }
}

TEST(Arrivals, TruckStreamsIndependentOfCarDistribution)
{
  SimConfig a;
  SimConfig b;
  b.car.desired = {150.0, 30.0};
  ArrivalProcess pa(a, 5);
  ArrivalProcess pb(b, 5);
  const auto xa = pa.arrivals_until(900.0);
  const auto xb = pb.arrivals_until(900.0);
  ASSERT_EQ(xa.size(), xb.size());
  for (std::size_t i = 0; i < xa.size(); ++i) {
    EXPECT_EQ(xa[i].arrival, xb[i].arrival);
    EXPECT_EQ(xa[i].draw, xb[i].draw);
    if (xa[i].cls == VehicleClass::kTruck) {
      EXPECT_EQ(xa[i].v_desired, xb[i].v_desired);
    }
  }
}

TEST(Advance, EmptyWorld)
{
  World world(roadnet::build_highway(2, 1000.0, 0.0));
  advance(world, 0.1, {});
  EXPECT_TRUE(world.vehicles().empty());
}

TEST(Advance, ConstantSpeedKinematics)
{
  World world(roadnet::build_highway(1, 1000.0, 0.0));
  Vehicle v;
  v.s = 50.0;
  v.v = 10.0;
  v.v_desired = 10.0;
  world.add(v);
  advance(world, 0.1, {});
  EXPECT_DOUBLE_EQ(world.vehicles()[0].s, 51.0);
  EXPECT_DOUBLE_EQ(world.vehicles()[0].v, 10.0);
}

TEST(Advance, TwoVehiclePlatoonSettles)
{
  World world(roadnet::build_highway(1, 1e6, 0.0));
  Vehicle lead;
  lead.id = 1;
  lead.s = 200.0;
  lead.v = 25.0;
  lead.v_desired = 25.0;
  Vehicle follower;
  follower.id = 2;
  follower.s = 100.0;
  follower.v = 25.0;
  follower.v_desired = 30.0;
  world.add(lead);
  world.add(follower);
  lanechange::LaneChangeParams lc;
  lc.enabled = false;
  for (int k = 0; k < 1000; ++k) {
    advance(world, 0.1, lc);
  }
  const auto & p = follower.params;
  const double gap = net_gap(world.vehicles()[1], world.vehicles()[0]);
  EXPECT_GE(gap, p.cc0 + p.cc1 * 25.0 - 0.5);
  EXPECT_LE(gap, p.cc0 + p.cc1 * 25.0 + p.cc2 + 0.5);
}

TEST(Advance, OverlapIsAConsistencyError)
{
  World world(roadnet::build_highway(1, 1000.0, 0.0));
  Vehicle a;
  a.id = 1;
  a.s = 100.0;
  Vehicle b;
  b.id = 2;
  b.s = 102.0;
  world.add(a);
  world.add(b);
  EXPECT_THROW(check_no_overlap(world), ConsistencyError);
}

TEST(Run, HorizonEqualToWarmupIsEmpty)
{
  const auto out = run(short_config(300.0, 300.0));
  EXPECT_TRUE(out.stats.empty());
  EXPECT_TRUE(out.trajectories.tracks.empty());
}

TEST(Run, SingleSlowFlowVehicleKeepsItsDesiredSpeed)
{
  SimConfig c = short_config(0.0, 600.0);
  c.network = roadnet::build_highway(1, 4000.0, 1500.0);
  c.car.volume_veh_h = 1.0;
  c.truck.volume_veh_h = 0.0;
  const auto out = run(c);
  ArrivalProcess arrivals(c, c.seed);
  const auto pending = arrivals.arrivals_until(c.horizon);
  ASSERT_LE(out.stats.size(), 1u);
  ASSERT_LE(out.summary.spawned_car, 1u);
  if (!out.stats.empty()) {
    EXPECT_NEAR(out.stats[0].mean_speed_kmh, pending.at(0).v_desired * 3.6, 1.0);
  }
  // a seed that does spawn within the window
  for (std::uint64_t seed = 1; seed < 200; ++seed) {
    c.seed = seed;
    ArrivalProcess probe(c, seed);
    const auto p = probe.arrivals_until(300.0);
    if (p.empty()) {
      continue;
    }
    const auto o = run(c);
    ASSERT_EQ(o.stats.size(), 1u);
    EXPECT_NEAR(o.stats[0].mean_speed_kmh, p[0].v_desired * 3.6, 1.0);
    return;
  }
  FAIL() << "no seed produced an early arrival";
}

TEST(Run, CarCountAfterWarmup)
{
  const auto out = run(short_config(600.0, 900.0));
  const auto cars = std::count_if(out.stats.begin(), out.stats.end(), [](const VehicleStats & s) {
    return s.cls == VehicleClass::kCar;
  });
  EXPECT_GE(cars, 100);
  EXPECT_LE(cars, 300);
}

TEST(Run, Deterministic)
{
  SimConfig c = short_config(100.0, 400.0);
  c.seed = 77;
  const auto a = run(c);
  const auto b = run(c);
  EXPECT_EQ(trajdata::serialize_dataset(a.trajectories), trajdata::serialize_dataset(b.trajectories));
  EXPECT_EQ(stats_csv(a.stats), stats_csv(b.stats));
  c.seed = 78;
  const auto d = run(c);
  EXPECT_NE(stats_csv(a.stats), stats_csv(d.stats));
}

TEST(Run, ConservationEveryStep)
{
  Engine engine(short_config(0.0, 600.0));
  while (!engine.done()) {
    engine.step();
    ASSERT_EQ(engine.spawned(), engine.world().vehicles().size() + engine.exited());
  }
  EXPECT_GT(engine.exited(), 0u);
}

TEST(Run, LightTrafficMeansApproachClassMu)
{
  SimConfig c = short_config(600.0, 600.0 + 3.0 * 3600.0);
  c.car.volume_veh_h = 250.0;
  c.truck.volume_veh_h = 50.0;
  c.record_trajectories = false;
  const auto out = run(c);
  const auto speeds = stats_speeds(out);
  ASSERT_GT(speeds.n_car(), 300u);
  ASSERT_GT(speeds.n_truck(), 50u);
  auto mean = [](const std::vector<double> & v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };
  EXPECT_NEAR(mean(speeds.car_speeds), 120.0, 2.0);
  EXPECT_NEAR(mean(speeds.truck_speeds), 85.0, 2.0);
}

TEST(Run, JammedInflowRaisesCongestion)
{
  SimConfig c = short_config(0.0, 900.0);
  c.network = roadnet::build_highway(1, 500.0, 0.0);
  c.car.volume_veh_h = 20000.0;
  c.truck.volume_veh_h = 0.0;
  try {
    run(c);
    FAIL() << "expected congestion";
  } catch (const CongestionError & e) {
    EXPECT_GT(e.sim_time(), c.jam_timeout);
  }
}

TEST(Run, StatsCsvFormat)
{
  std::vector<VehicleStats> stats(2);
  stats[0] = {3, VehicleClass::kCar, false, 118.123456789, 2.5, 7.25, 4, true};
  stats[1] = {4, VehicleClass::kTruck, true, 80.0, std::nullopt, std::nullopt, 0, false};
  EXPECT_EQ(
    stats_csv(stats),
    "id,class,mean_speed_kmh,min_ttc_s,mean_ttc_s,completed\n"
    "3,car,118.123,2.5,7.25,1\n"
    "4,truck,80,,,0\n");
  EXPECT_EQ(stats_csv({}), "id,class,mean_speed_kmh,min_ttc_s,mean_ttc_s,completed\n");
}

TEST(Run, AlteredSubsetFraction)
{
  SimConfig c = short_config(300.0, 900.0);
  c.altered = AlteredSubset{0.25, {}};
  c.record_trajectories = false;
  const auto out = run(c);
  std::size_t cars = 0;
  std::size_t altered = 0;
  for (const auto & s : out.stats) {
    EXPECT_TRUE(!s.altered || s.cls == VehicleClass::kCar);
    cars += s.cls == VehicleClass::kCar;
    altered += s.altered;
  }
  EXPECT_NEAR(static_cast<double>(altered) / static_cast<double>(cars), 0.25, 0.06);
}

}  // namespace
}  // namespace w99sim::sim
