#pragma once

namespace w99sim::roadnet
{

/// Straight multi-lane highway along a single longitudinal axis.
///
/// Lanes are indexed from 0 (rightmost) to lane_count - 1 (leftmost). The
/// first `inflow_length` meters are a warm-up segment; statistics are only
/// collected in the measurement region [inflow_length, total_length()).
struct RoadNetwork
{
  int lane_count = 1;
  double mainline_length = 0.0;
  double inflow_length = 0.0;
  double lane_width = 3.5;

  double total_length() const { return inflow_length + mainline_length; }
  double region_begin() const { return inflow_length; }
  double region_end() const { return total_length(); }
  bool valid_lane(int lane) const { return lane >= 0 && lane < lane_count; }
};

struct LanePosition
{
  double s = 0.0;
  int lane = 0;
};

/// Throws ConfigError on zero lanes, non-positive mainline or negative inflow.
RoadNetwork build_highway(
  int lane_count, double mainline_length, double inflow_length, double lane_width = 3.5);

bool in_measurement_region(const RoadNetwork & network, double s);

/// Half-open region check usable without a network (e.g. on parsed datasets).
struct Region
{
  double begin = 0.0;
  double end = 0.0;
  bool contains(double s) const { return s >= begin && s < end; }
};

inline Region measurement_region(const RoadNetwork & network)
{
  return {network.region_begin(), network.region_end()};
}

}  // namespace w99sim::roadnet
