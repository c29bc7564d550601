#pragma once

#include "w99sim/carfollow.hpp"
#include "w99sim/roadnet.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace w99sim
{

enum class VehicleClass { kCar, kTruck, kBicycle, kPedestrian, kOther };

inline constexpr std::size_t kVehicleClassCount = 5;

std::string_view class_name(VehicleClass cls);
/// Throws ParseError for unknown names.
VehicleClass parse_class(std::string_view name);

/// Running per-vehicle statistics over in-region, post-warm-up samples.
struct VehicleStatsAccumulator
{
  double speed_sum = 0.0;
  std::size_t speed_samples = 0;
  double ttc_min = std::numeric_limits<double>::infinity();
  double ttc_sum = 0.0;
  std::size_t ttc_samples = 0;
};

/// A simulated vehicle. `s` is the front-bumper position along the axis.
struct Vehicle
{
  std::uint64_t id = 0;
  VehicleClass cls = VehicleClass::kCar;
  double length = 4.5;
  double width = 1.8;
  int lane = 0;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  double v_desired = 0.0;
  double draw = 0.5;
  bool altered = false;
  double cooldown = 0.0;
  double spawn_time = 0.0;
  carfollow::W99Params params;
  VehicleStatsAccumulator stats;
  std::size_t record_slot = std::numeric_limits<std::size_t>::max();

  double rear() const { return s - length; }
};

/// Vehicles on a road network plus a per-lane index sorted by position.
///
/// The index is only valid after `reindex()`; mutating `vehicles` directly
/// invalidates it.
class World
{
public:
  explicit World(roadnet::RoadNetwork network);

  const roadnet::RoadNetwork & network() const { return network_; }

  std::vector<Vehicle> & vehicles() { return vehicles_; }
  const std::vector<Vehicle> & vehicles() const { return vehicles_; }

  /// Rebuilds the per-lane ordering (ascending s, ties by id).
  void reindex();

  /// Indices into vehicles(), ordered by ascending s.
  const std::vector<std::size_t> & lane_order(int lane) const;

  /// Moves vehicle `index` to `lane`, keeping the lane index consistent.
  void move_to_lane(std::size_t index, int lane);

  /// Appends a vehicle, keeping the lane index consistent. Returns its index.
  std::size_t add(Vehicle vehicle);

private:
  void insert_sorted(std::size_t index);

  roadnet::RoadNetwork network_;
  std::vector<Vehicle> vehicles_;
  std::vector<std::vector<std::size_t>> lanes_;
};

/// Nearest vehicle on `lane` with s strictly greater than `vehicle.s`.
std::optional<std::size_t> leader_of(const World & world, const Vehicle & vehicle, int lane);

/// Nearest other vehicle on `lane` with s <= `vehicle.s`.
std::optional<std::size_t> follower_of(const World & world, const Vehicle & vehicle, int lane);

/// Net gap from `follower`'s front bumper to `leader`'s rear bumper.
inline double net_gap(const Vehicle & follower, const Vehicle & leader)
{
  return leader.rear() - follower.s;
}

/// Car-following state of `follower` behind `leader` (or free when absent).
carfollow::FollowState follow_state(const Vehicle & follower, const Vehicle * leader);

}  // namespace w99sim
