#include "w99sim/lanechange.hpp"

#include <algorithm>
#include <cmath>

namespace w99sim::lanechange
{

std::string_view direction_name(Direction d)
{
  switch (d) {
    case Direction::kKeep:
      return "keep";
    case Direction::kLeft:
      return "left";
    case Direction::kRight:
      return "right";
  }
  return "unknown";
}

std::string_view reason_name(Reason r)
{
  switch (r) {
    case Reason::kOvertake:
      return "overtake";
    case Reason::kKeepRight:
      return "keep_right";
    case Reason::kBlocked:
      return "blocked";
    case Reason::kNone:
      return "none";
  }
  return "unknown";
}

int target_lane(const Vehicle & vehicle, Direction direction)
{
  switch (direction) {
    case Direction::kLeft:
      return vehicle.lane + 1;
    case Direction::kRight:
      return vehicle.lane - 1;
    case Direction::kKeep:
      break;
  }
  return vehicle.lane;
}

double lane_prospect(const World & world, const Vehicle & vehicle, int lane)
{
  const auto leader = leader_of(world, vehicle, lane);
  if (!leader) {
    return vehicle.v_desired;
  }
  const Vehicle & lead = world.vehicles()[*leader];
  if (lead.v >= vehicle.v_desired) {
    return vehicle.v_desired;
  }
  // The leader only matters if we would close up on it within the horizon.
  const double settle_gap =
    vehicle.params.cc0 + vehicle.params.cc1 * lead.v + vehicle.params.cc2;
  const double reach = settle_gap + (vehicle.v_desired - lead.v) * kProspectHorizon;
  return net_gap(vehicle, lead) < reach ? lead.v : vehicle.v_desired;
}

bool gap_acceptable(
  const World & world, const Vehicle & vehicle, int lane, const LaneChangeParams & params)
{
  using carfollow::Regime;
  if (!world.network().valid_lane(lane)) {
    return false;
  }
  const auto & vehicles = world.vehicles();

  if (const auto leader = leader_of(world, vehicle, lane)) {
    const Vehicle & lead = vehicles[*leader];
    if (net_gap(vehicle, lead) <= 0.0) {
      return false;
    }
    const auto state = follow_state(vehicle, &lead);
    const auto th = carfollow::thresholds(state, vehicle.params);
    if (state.dx <= th.sdxc || carfollow::regime(state, th) == Regime::kEmergency) {
      return false;
    }
    if (carfollow::deceleration_demand(state, vehicle.params) > params.accepted_decel_own) {
      return false;
    }
  }

  if (const auto follower = follower_of(world, vehicle, lane)) {
    const Vehicle & back = vehicles[*follower];
    if (net_gap(back, vehicle) <= 0.0) {
      return false;
    }
    const auto state = follow_state(back, &vehicle);
    const auto th = carfollow::thresholds(state, back.params);
    if (state.dx <= th.sdxc || carfollow::regime(state, th) == Regime::kEmergency) {
      return false;
    }
    if (carfollow::deceleration_demand(state, back.params) > params.accepted_decel_follower) {
      return false;
    }
  }
  return true;
}

Decision evaluate_lane_change(
  const World & world, const Vehicle & vehicle, const LaneChangeParams & params)
{
  const double threshold = params.desire_threshold_kmh / 3.6;
  // Without an overtaking desire there is nothing to return from either.
  if (!params.enabled || world.network().lane_count < 2 || !std::isfinite(threshold)) {
    return {};
  }
  const int lane = vehicle.lane;
  const int left = lane + 1;
  const int right = lane - 1;
  const bool has_left = world.network().valid_lane(left);
  const bool has_right = world.network().valid_lane(right);
  bool blocked = false;

  if (has_left) {
    const double here = lane_prospect(world, vehicle, lane);
    if (here < vehicle.v_desired - threshold) {
      const double there = lane_prospect(world, vehicle, left);
      if (there > here) {
        if (gap_acceptable(world, vehicle, left, params)) {
          return {Direction::kLeft, Reason::kOvertake};
        }
        blocked = true;
      }
    }
  }

  if (params.keep_right && has_right) {
    if (lane_prospect(world, vehicle, right) >= kKeepRightShare * vehicle.v_desired) {
      if (gap_acceptable(world, vehicle, right, params)) {
        return {Direction::kRight, Reason::kKeepRight};
      }
      blocked = true;
    }
  }

  return blocked ? Decision{Direction::kKeep, Reason::kBlocked} : Decision{};
}

int execute_lane_change(
  Vehicle & vehicle, const Decision & decision, const LaneChangeParams & params, int lane_count)
{
  if (decision.direction == Direction::kKeep || vehicle.cooldown > 0.0) {
    return vehicle.lane;
  }
  const int target = target_lane(vehicle, decision.direction);
  if (target < 0 || target >= lane_count) {
    return vehicle.lane;
  }
  vehicle.lane = target;
  vehicle.cooldown = params.cooldown_s;
  return vehicle.lane;
}

}  // namespace w99sim::lanechange
