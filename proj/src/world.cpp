#include "w99sim/world.hpp"

#include "w99sim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>

namespace w99sim
{

namespace
{
constexpr std::array<std::string_view, kVehicleClassCount> kClassNames = {
  "car", "truck", "bicycle", "pedestrian", "other"};
}

std::string_view class_name(VehicleClass cls)
{
  return kClassNames[static_cast<std::size_t>(cls)];
}

VehicleClass parse_class(std::string_view name)
{
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) {
      return static_cast<VehicleClass>(i);
    }
  }
  throw ParseError(fmt::format("unknown vehicle class '{}'", name));
}

World::World(roadnet::RoadNetwork network)
: network_(network), lanes_(static_cast<std::size_t>(network.lane_count))
{
}

void World::reindex()
{
  for (auto & lane : lanes_) {
    lane.clear();
  }
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    const int lane = vehicles_[i].lane;
    if (!network_.valid_lane(lane)) {
      throw ConsistencyError(
        fmt::format("vehicle {} on invalid lane {}", vehicles_[i].id, lane));
    }
    lanes_[static_cast<std::size_t>(lane)].push_back(i);
  }
  for (auto & lane : lanes_) {
    std::sort(lane.begin(), lane.end(), [this](std::size_t a, std::size_t b) {
      const Vehicle & va = vehicles_[a];
      const Vehicle & vb = vehicles_[b];
      return va.s != vb.s ? va.s < vb.s : va.id < vb.id;
    });
  }
}

const std::vector<std::size_t> & World::lane_order(int lane) const
{
  return lanes_.at(static_cast<std::size_t>(lane));
}

void World::insert_sorted(std::size_t index)
{
  auto & order = lanes_.at(static_cast<std::size_t>(vehicles_[index].lane));
  auto pos = std::upper_bound(order.begin(), order.end(), index, [this](std::size_t a, std::size_t b) {
    const Vehicle & va = vehicles_[a];
    const Vehicle & vb = vehicles_[b];
    return va.s != vb.s ? va.s < vb.s : va.id < vb.id;
  });
  order.insert(pos, index);
}

void World::move_to_lane(std::size_t index, int lane)
{
  if (!network_.valid_lane(lane)) {
    throw ConsistencyError(fmt::format("lane change to invalid lane {}", lane));
  }
  auto & old_order = lanes_.at(static_cast<std::size_t>(vehicles_[index].lane));
  old_order.erase(std::find(old_order.begin(), old_order.end(), index));
  vehicles_[index].lane = lane;
  insert_sorted(index);
}

std::size_t World::add(Vehicle vehicle)
{
  vehicles_.push_back(vehicle);
  const std::size_t index = vehicles_.size() - 1;
  insert_sorted(index);
  return index;
}

std::optional<std::size_t> leader_of(const World & world, const Vehicle & vehicle, int lane)
{
  if (!world.network().valid_lane(lane)) {
    return std::nullopt;
  }
  const auto & order = world.lane_order(lane);
  const auto & vehicles = world.vehicles();
  auto it = std::upper_bound(
    order.begin(), order.end(), vehicle.s,
    [&vehicles](double s, std::size_t idx) { return s < vehicles[idx].s; });
  if (it == order.end()) {
    return std::nullopt;
  }
  return *it;
}

std::optional<std::size_t> follower_of(const World & world, const Vehicle & vehicle, int lane)
{
  if (!world.network().valid_lane(lane)) {
    return std::nullopt;
  }
  const auto & order = world.lane_order(lane);
  const auto & vehicles = world.vehicles();
  auto it = std::upper_bound(
    order.begin(), order.end(), vehicle.s,
    [&vehicles](double s, std::size_t idx) { return s < vehicles[idx].s; });
  while (it != order.begin()) {
    --it;
    if (vehicles[*it].id != vehicle.id) {
      return *it;
    }
  }
  return std::nullopt;
}

carfollow::FollowState follow_state(const Vehicle & follower, const Vehicle * leader)
{
  if (leader == nullptr) {
    return carfollow::free_state(follower.v, follower.v_desired, follower.draw);
  }
  return carfollow::make_state(
    follower.v, follower.v_desired, net_gap(follower, *leader), leader->v, leader->a,
    follower.draw);
}

}  // namespace w99sim
