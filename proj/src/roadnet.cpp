#include "w99sim/roadnet.hpp"

#include "w99sim/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace w99sim::roadnet
{

RoadNetwork build_highway(
  int lane_count, double mainline_length, double inflow_length, double lane_width)
{
  if (lane_count < 1) {
    throw ConfigError(fmt::format("network: lane_count must be >= 1, got {}", lane_count));
  }
  if (!std::isfinite(mainline_length) || mainline_length <= 0.0) {
    throw ConfigError(
      fmt::format("network: mainline length must be > 0, got {}", mainline_length));
  }
  if (!std::isfinite(inflow_length) || inflow_length < 0.0) {
    throw ConfigError(fmt::format("network: inflow length must be >= 0, got {}", inflow_length));
  }
  if (!std::isfinite(lane_width) || lane_width <= 0.0) {
    throw ConfigError(fmt::format("network: lane width must be > 0, got {}", lane_width));
  }
  return RoadNetwork{lane_count, mainline_length, inflow_length, lane_width};
}

bool in_measurement_region(const RoadNetwork & network, double s)
{
  return s >= network.inflow_length;
}

}  // namespace w99sim::roadnet
