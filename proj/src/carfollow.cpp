#include "w99sim/carfollow.hpp"

#include "w99sim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace w99sim::carfollow
{

namespace
{
constexpr std::array<std::string_view, W99Params::kCount> kNames = {
  "cc0", "cc1", "cc2", "cc3", "cc4", "cc5", "cc6", "cc7", "cc8", "cc9"};

double W99Params::* const kMembers[W99Params::kCount] = {
  &W99Params::cc0, &W99Params::cc1, &W99Params::cc2, &W99Params::cc3, &W99Params::cc4,
  &W99Params::cc5, &W99Params::cc6, &W99Params::cc7, &W99Params::cc8, &W99Params::cc9};
}  // namespace

double W99Params::get(std::size_t index) const
{
  if (index >= kCount) {
    throw ConfigError(fmt::format("w99: parameter index {} out of range", index));
  }
  return this->*kMembers[index];
}

void W99Params::set(std::size_t index, double value)
{
  if (index >= kCount) {
    throw ConfigError(fmt::format("w99: parameter index {} out of range", index));
  }
  this->*kMembers[index] = value;
}

void W99Params::validate() const
{
  for (std::size_t i = 0; i < kCount; ++i) {
    if (!std::isfinite(get(i))) {
      throw ConfigError(fmt::format("w99: {} must be finite", kNames[i]));
    }
  }
  auto require = [](bool ok, std::string_view what) {
    if (!ok) {
      throw ConfigError(fmt::format("w99: constraint violated: {}", what));
    }
  };
  require(cc0 > 0.0, "cc0 > 0");
  require(cc1 > 0.0, "cc1 > 0");
  require(cc2 >= 0.0, "cc2 >= 0");
  require(cc3 < 0.0, "cc3 < 0");
  require(cc4 < 0.0, "cc4 < 0");
  require(cc5 > 0.0, "cc5 > 0");
  require(cc6 >= 0.0, "cc6 >= 0");
  require(cc7 > 0.0, "cc7 > 0");
  require(cc8 > 0.0, "cc8 > 0");
  require(cc9 > 0.0, "cc9 > 0");
}

std::string_view param_name(std::size_t index)
{
  if (index >= W99Params::kCount) {
    throw ConfigError(fmt::format("w99: parameter index {} out of range", index));
  }
  return kNames[index];
}

std::size_t param_index(std::string_view name)
{
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) {
      return i;
    }
  }
  throw ConfigError(fmt::format("unknown W99 parameter '{}' (expected cc0..cc9)", name));
}

bool FollowState::has_leader() const { return std::isfinite(dx); }

FollowState make_state(
  double v, double v_desired, double dx, double v_lead, double a_lead, double draw)
{
  return FollowState{v, v_lead, a_lead, dx, v_lead - v, v_desired, draw};
}

FollowState free_state(double v, double v_desired, double draw)
{
  return FollowState{
    v, v, 0.0, std::numeric_limits<double>::infinity(), 0.0, v_desired, draw};
}

std::string_view regime_name(Regime regime)
{
  switch (regime) {
    case Regime::kFree:
      return "free";
    case Regime::kApproaching:
      return "approaching";
    case Regime::kFollowing:
      return "following";
    case Regime::kEmergency:
      return "emergency";
  }
  return "unknown";
}

Thresholds thresholds(const FollowState & state, const W99Params & p)
{
  Thresholds th;
  if (!state.has_leader()) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    th.sdxc = p.cc0 + p.cc1 * state.v;
    th.sdxo = th.sdxc + p.cc2;
    th.sdxv = th.sdxo;
    th.sdv = inf;
    th.sdvc = -inf;
    th.sdvo = inf;
    return th;
  }

  // Slower of the two speeds, blurred by the driver's fixed draw while closing in.
  double v_slow = state.v;
  if (!(state.dv >= 0.0 || state.a_lead < -1.0)) {
    v_slow = state.v_lead + state.dv * (state.draw - 0.5);
  }

  th.sdxc = state.v_lead <= 0.0 ? p.cc0 : p.cc0 + p.cc1 * std::max(v_slow, 0.0);
  th.sdxo = th.sdxc + p.cc2;
  th.sdxv = th.sdxo + p.cc3 * (state.dv - p.cc4);
  // cc6 is given in 1/(m*s); the 1e-4 factor maps dx^2 [m^2] to a speed band [m/s].
  th.sdv = p.cc6 * 1.0e-4 * state.dx * state.dx;
  th.sdvc = state.v_lead > 0.0 ? p.cc4 - th.sdv : 0.0;
  th.sdvo = state.v > p.cc5 ? th.sdv + p.cc5 : th.sdv;
  return th;
}

Regime regime(const FollowState & state, const Thresholds & th)
{
  if (!state.has_leader()) {
    return Regime::kFree;
  }
  if (state.dx <= th.sdxc && state.dv < th.sdvo) {
    return Regime::kEmergency;
  }
  if (state.dv < th.sdvc && state.dx < th.sdxv) {
    return Regime::kApproaching;
  }
  if (state.dv < th.sdvo && state.dx < th.sdxo) {
    return Regime::kFollowing;
  }
  return Regime::kFree;
}

double free_acceleration(double v, double v_desired, const W99Params & p)
{
  const double ramp = std::min(std::max(v, 0.0), kAccelRefSpeed) / kAccelRefSpeed;
  const double a_max = p.cc8 + (p.cc9 - p.cc8) * ramp;
  // Linear taper: full acceleration more than kTaperBand below the desired
  // speed, zero at it, and symmetric deceleration above it.
  const double taper = std::clamp((v_desired - v) / kTaperBand, -1.0, 1.0);
  return a_max * taper;
}

namespace
{

double approach_deceleration(const FollowState & s, const Thresholds & th)
{
  const double room = std::max(s.dx - th.sdxc, 1.0e-3);
  return -0.5 * s.dv * s.dv / room;
}

double emergency_deceleration(const FollowState & s, const W99Params & p, const Thresholds & th)
{
  double a = 0.0;
  if (s.dv < 0.0) {
    if (s.dx > p.cc0) {
      a = s.a_lead - s.dv * s.dv / (s.dx - p.cc0);
    } else {
      const double stop = s.a_lead - s.dv * s.dv / (2.0 * std::max(s.dx, 0.1));
      a = std::min(s.a_lead + 0.5 * (s.dv - th.sdvo), stop);
    }
  }
  return std::min(a, -p.cc7);
}

}  // namespace

double acceleration(const FollowState & state, const W99Params & p)
{
  const Thresholds th = thresholds(state, p);
  const double a_free = free_acceleration(state.v, state.v_desired, p);
  double a = 0.0;
  switch (regime(state, th)) {
    case Regime::kEmergency:
      a = emergency_deceleration(state, p, th);
      break;
    case Regime::kApproaching:
      a = std::min(approach_deceleration(state, th), a_free);
      break;
    case Regime::kFollowing: {
      // Bang-bang oscillation around the leader's speed, nudged towards the
      // middle of the following band.
      const double mid = 0.5 * (th.sdxc + th.sdxo);
      const double drift = state.dv + 0.1 * (state.dx - mid);
      a = drift > 0.0 ? p.cc7 : -p.cc7;
      a = std::min(a, std::max(a_free, -p.cc7));
      break;
    }
    case Regime::kFree:
      a = a_free;
      if (state.has_leader() && state.dx < th.sdxo) {
        // Still inside the following band but drifting apart: relax gently.
        a = std::min(a, p.cc7);
      }
      break;
  }
  return std::clamp(a, -kMaxBrake, std::max(p.cc8, p.cc9));
}

double deceleration_demand(const FollowState & state, const W99Params & p)
{
  if (!state.has_leader() || state.dv >= 0.0) {
    return 0.0;
  }
  const Thresholds th = thresholds(state, p);
  if (state.dx <= th.sdxc) {
    return std::numeric_limits<double>::infinity();
  }
  return 0.5 * state.dv * state.dv / (state.dx - th.sdxc);
}

}  // namespace w99sim::carfollow
