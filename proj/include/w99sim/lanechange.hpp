#pragma once

#include "w99sim/world.hpp"

#include <limits>
#include <string_view>

namespace w99sim::lanechange
{

/// Rule-based lane selection: overtaking desire, keep-right bias and gap
/// acceptance. This approximates a Sparmann-type model; it is not a
/// reproduction of it.
struct LaneChangeParams
{
  bool enabled = true;
  bool keep_right = true;
  /// Overtaking is desired once the current lane holds the driver more than
  /// this far below the desired speed. +inf disables overtaking and, with
  /// it, every lane change.
  double desire_threshold_kmh = 10.0;
  double cooldown_s = 3.0;
  /// Largest deceleration a changer accepts to settle behind its new leader [m/s^2].
  double accepted_decel_own = 2.0;
  /// Largest deceleration imposed on the new follower [m/s^2].
  double accepted_decel_follower = 2.0;
};

/// Look-ahead used to judge what a lane will allow [s].
inline constexpr double kProspectHorizon = 10.0;
/// A right change needs the right lane to allow this share of the desired speed.
inline constexpr double kKeepRightShare = 0.9;

enum class Direction { kKeep, kLeft, kRight };
enum class Reason { kOvertake, kKeepRight, kBlocked, kNone };

struct Decision
{
  Direction direction = Direction::kKeep;
  Reason reason = Reason::kNone;

  bool operator==(const Decision &) const = default;
};

std::string_view direction_name(Direction d);
std::string_view reason_name(Reason r);

/// Speed the vehicle can expect to hold on `lane` over the look-ahead horizon.
double lane_prospect(const World & world, const Vehicle & vehicle, int lane);

/// True when moving `vehicle` onto `lane` leaves both it and the new follower
/// beyond their safety distance sdxc and outside the emergency regime, and
/// neither needs to brake harder than the accepted deceleration to settle.
bool gap_acceptable(
  const World & world, const Vehicle & vehicle, int lane, const LaneChangeParams & params);

/// Requires an up-to-date lane index on `world`.
Decision evaluate_lane_change(
  const World & world, const Vehicle & vehicle, const LaneChangeParams & params);

/// Applies `decision` to `vehicle` and returns its (possibly unchanged) lane.
/// Ignored while the cooldown is running or when the target lane is invalid.
int execute_lane_change(
  Vehicle & vehicle, const Decision & decision, const LaneChangeParams & params, int lane_count);

int target_lane(const Vehicle & vehicle, Direction direction);

}  // namespace w99sim::lanechange
