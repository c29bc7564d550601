#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace w99sim::carfollow
{

/// Wiedemann99 constants. Units: cc0 m, cc1 s, cc2 m, cc3 s, cc4 m/s,
/// cc5 m/s, cc6 1/(m*s), cc7 m/s^2, cc8 m/s^2, cc9 m/s^2.
/// Member defaults are the common simulator defaults.
struct W99Params
{
  double cc0 = 1.5;
  double cc1 = 0.9;
  double cc2 = 4.0;
  double cc3 = -8.0;
  double cc4 = -0.35;
  double cc5 = 0.35;
  double cc6 = 11.44;
  double cc7 = 0.25;
  double cc8 = 3.5;
  double cc9 = 1.5;

  static constexpr std::size_t kCount = 10;

  double get(std::size_t index) const;
  void set(std::size_t index, double value);

  /// Throws ConfigError naming the first violated sign constraint.
  void validate() const;

  bool operator==(const W99Params &) const = default;
};

/// "cc0" .. "cc9"
std::string_view param_name(std::size_t index);
/// Inverse of param_name; throws ConfigError for unknown names.
std::size_t param_index(std::string_view name);

/// Maximum service braking used to clamp every regime.
inline constexpr double kMaxBrake = 8.0;
/// Speed at which the free-flow acceleration reaches cc9 (80 km/h).
inline constexpr double kAccelRefSpeed = 80.0 / 3.6;
/// Free-flow acceleration tapers to zero over this band below the desired speed.
inline constexpr double kTaperBand = 5.0 / 3.6;

struct FollowState
{
  double v = 0.0;         ///< follower speed [m/s]
  double v_lead = 0.0;    ///< leader speed [m/s]
  double a_lead = 0.0;    ///< leader acceleration [m/s^2]
  double dx = 0.0;        ///< net gap [m]; +inf when there is no leader
  double dv = 0.0;        ///< v_lead - v [m/s]; negative when closing
  double v_desired = 0.0; ///< [m/s]
  double draw = 0.5;      ///< per-driver uniform draw in [0, 1], fixed at spawn

  bool has_leader() const;
};

/// Builds a follow state; pass no leader through `free_state`.
FollowState make_state(
  double v, double v_desired, double dx, double v_lead, double a_lead, double draw);
FollowState free_state(double v, double v_desired, double draw);

struct Thresholds
{
  double sdxc = 0.0;  ///< desired minimum following distance
  double sdxo = 0.0;  ///< maximum following distance
  double sdxv = 0.0;  ///< perception distance for approaching slower leaders
  double sdv = 0.0;   ///< speed-difference perception term
  double sdvc = 0.0;  ///< closing speed-difference threshold
  double sdvo = 0.0;  ///< opening speed-difference threshold
};

enum class Regime { kFree, kApproaching, kFollowing, kEmergency };

std::string_view regime_name(Regime regime);

Thresholds thresholds(const FollowState & state, const W99Params & params);

Regime regime(const FollowState & state, const Thresholds & th);

/// Acceleration [m/s^2], bounded to [-kMaxBrake, max(cc8, cc9)].
double acceleration(const FollowState & state, const W99Params & params);

/// Unconstrained acceleration towards the desired speed.
double free_acceleration(double v, double v_desired, const W99Params & params);

/// Deceleration magnitude [m/s^2] the follower needs to settle at sdxc without
/// entering the emergency regime. Zero when not closing in.
double deceleration_demand(const FollowState & state, const W99Params & params);

}  // namespace w99sim::carfollow
