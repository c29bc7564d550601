#include "w99sim/lanechange.hpp"
#include "w99sim/sim.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <map>

namespace w99sim::lanechange
{
namespace
{

Vehicle car(std::uint64_t id, int lane, double s, double v, double v_desired)
{
  Vehicle veh;
  veh.id = id;
  veh.lane = lane;
  veh.s = s;
  veh.v = v;
  veh.v_desired = v_desired;
  return veh;
}

TEST(LaneChange, SingleLaneKeeps)
{
  World world(roadnet::build_highway(1, 2000.0, 0.0));
  world.add(car(0, 0, 100.0, 30.0, 36.0));
  const auto d = evaluate_lane_change(world, world.vehicles()[0], {});
  EXPECT_EQ(d.direction, Direction::kKeep);
  EXPECT_EQ(d.reason, Reason::kNone);
}

TEST(LaneChange, SlowLeaderTriggersOvertake)
{
  World world(roadnet::build_highway(2, 2000.0, 0.0));
  world.add(car(0, 0, 100.0, 25.0, 36.0));
  world.add(car(1, 0, 160.0, 20.0, 20.0));
  const auto d = evaluate_lane_change(world, world.vehicles()[0], {});
  EXPECT_EQ(d.direction, Direction::kLeft);
  EXPECT_EQ(d.reason, Reason::kOvertake);
}

TEST(LaneChange, EmptyRightLaneKeepsRight)
{
  World world(roadnet::build_highway(2, 2000.0, 0.0));
  world.add(car(0, 1, 100.0, 30.0, 33.0));
  const auto d = evaluate_lane_change(world, world.vehicles()[0], {});
  EXPECT_EQ(d.direction, Direction::kRight);
  EXPECT_EQ(d.reason, Reason::kKeepRight);
}

TEST(LaneChange, KeepRightDisabled)
{
  World world(roadnet::build_highway(2, 2000.0, 0.0));
  world.add(car(0, 1, 100.0, 30.0, 33.0));
  LaneChangeParams params;
  params.keep_right = false;
  EXPECT_EQ(evaluate_lane_change(world, world.vehicles()[0], params).direction, Direction::kKeep);
}

TEST(LaneChange, OccupiedTargetGapIsBlocked)
{
  World world(roadnet::build_highway(2, 2000.0, 0.0));
  world.add(car(0, 0, 100.0, 25.0, 36.0));
  world.add(car(1, 0, 160.0, 20.0, 20.0));
  world.add(car(2, 1, 102.0, 25.0, 25.0));  // alongside on the left
  const auto d = evaluate_lane_change(world, world.vehicles()[0], {});
  EXPECT_EQ(d.direction, Direction::kKeep);
  EXPECT_EQ(d.reason, Reason::kBlocked);
}

TEST(LaneChange, DecisionKeepIffBlockedOrNone)
{
  World world(roadnet::build_highway(3, 2000.0, 0.0));
  for (int lane = 0; lane < 3; ++lane) {
    for (double s : {100.0, 140.0, 180.0}) {
      world.add(car(world.vehicles().size(), lane, s + 7.0 * lane, 20.0 + 4.0 * lane, 36.0));
    }
  }
  world.reindex();
  for (const auto & veh : world.vehicles()) {
    const auto d = evaluate_lane_change(world, veh, {});
    const bool keep = d.direction == Direction::kKeep;
    const bool passive = d.reason == Reason::kBlocked || d.reason == Reason::kNone;
    EXPECT_EQ(keep, passive);
  }
}

TEST(LaneChange, ExecuteKeep)
{
  Vehicle v = car(0, 1, 0.0, 0.0, 0.0);
  EXPECT_EQ(execute_lane_change(v, {Direction::kKeep, Reason::kNone}, {}, 3), 1);
}

TEST(LaneChange, ExecuteLeftStartsCooldown)
{
  Vehicle v = car(0, 0, 0.0, 0.0, 0.0);
  EXPECT_EQ(execute_lane_change(v, {Direction::kLeft, Reason::kOvertake}, {}, 3), 1);
  EXPECT_DOUBLE_EQ(v.cooldown, 3.0);
}

TEST(LaneChange, CooldownBlocksChange)
{
  Vehicle v = car(0, 0, 0.0, 0.0, 0.0);
  v.cooldown = 1.0;
  EXPECT_EQ(execute_lane_change(v, {Direction::kLeft, Reason::kOvertake}, {}, 3), 0);
}

TEST(LaneChange, InvalidTargetIgnored)
{
  Vehicle v = car(0, 0, 0.0, 0.0, 0.0);
  EXPECT_EQ(execute_lane_change(v, {Direction::kRight, Reason::kKeepRight}, {}, 3), 0);
  Vehicle w = car(1, 2, 0.0, 0.0, 0.0);
  EXPECT_EQ(execute_lane_change(w, {Direction::kLeft, Reason::kOvertake}, {}, 3), 2);
}

TEST(LaneChange, GapAcceptanceProtectsNewFollower)
{
  World world(roadnet::build_highway(2, 2000.0, 0.0));
  world.add(car(0, 0, 100.0, 25.0, 30.0));
  world.add(car(1, 1, 90.0, 35.0, 40.0));  // fast vehicle close behind in the target lane
  EXPECT_FALSE(gap_acceptable(world, world.vehicles()[0], 1, {}));
  world.vehicles()[1].s = 20.0;
  world.reindex();
  EXPECT_TRUE(gap_acceptable(world, world.vehicles()[0], 1, {}));
}

TEST(LaneChange, NoOvertakingKeepsSpawnLanes)
{
  sim::SimConfig config;
  config.horizon = 900.0;
  config.warmup = 0.0;
  config.record_trajectories = true;
  config.lane_change.desire_threshold_kmh = std::numeric_limits<double>::infinity();
  const auto out = sim::run(config);
  ASSERT_FALSE(out.trajectories.tracks.empty());
  for (const auto & track : out.trajectories.tracks) {
    for (const auto & sample : track.samples) {
      ASSERT_EQ(sample.lane, track.samples.front().lane) << "track " << track.id;
    }
  }
}

TEST(LaneChange, LaneIndexAlwaysValid)
{
  sim::SimConfig config;
  config.horizon = 900.0;
  config.warmup = 0.0;
  const auto out = sim::run(config);
  std::size_t changes = 0;
  for (const auto & track : out.trajectories.tracks) {
    for (std::size_t i = 0; i < track.samples.size(); ++i) {
      ASSERT_GE(track.samples[i].lane, 0);
      ASSERT_LT(track.samples[i].lane, 3);
      if (i > 0 && track.samples[i].lane != track.samples[i - 1].lane) {
        ++changes;
      }
    }
  }
  EXPECT_GT(changes, 0u);
}

}  // namespace
}  // namespace w99sim::lanechange
