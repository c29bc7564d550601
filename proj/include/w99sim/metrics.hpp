#pragma once

#include "w99sim/trajdata.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace w99sim::metrics
{

/// Time to collision on the net gap; nullopt unless the follower is faster.
std::optional<double> ttc(double dx_net, double v_follower, double v_leader);

struct TtcSample
{
  double t = 0.0;
  double ttc = 0.0;
};

struct TtcSeries
{
  std::uint64_t id = 0;
  std::vector<TtcSample> samples;
  double min_ttc = 0.0;
  double mean_ttc = 0.0;
};

/// Reduced form of a series; what the simulator keeps per vehicle.
struct TtcSummary
{
  std::uint64_t id = 0;
  double min_ttc = 0.0;
  double mean_ttc = 0.0;
  std::size_t n_defined = 0;
};

TtcSummary summarize(const TtcSeries & series);

/// A follower and its nearest same-lane leader at one timestamp.
struct PairObservation
{
  double t = 0.0;
  std::uint64_t follower = 0;
  std::uint64_t leader = 0;
  double dx_net = 0.0;
  double v_follower = 0.0;
  double v_leader = 0.0;
};

/// Timestamps are grouped at microsecond resolution. Negative net gaps
/// (overlapping measurements) are reported as 0.
std::vector<PairObservation> same_lane_pairs(const trajdata::TrajectoryDataset & dataset);

/// One series per vehicle with at least one defined TTC sample, ordered by id.
std::vector<TtcSeries> ttc_series(const trajdata::TrajectoryDataset & dataset);

struct SweepAggregate
{
  std::optional<double> min_mean_ttc;  ///< smallest per-vehicle mean TTC
  std::optional<double> min_min_ttc;   ///< smallest TTC in any sample
};

SweepAggregate sweep_aggregate(std::span<const TtcSummary> summaries);
SweepAggregate sweep_aggregate(std::span<const TtcSeries> series);

/// Conflict zone: a longitudinal interval on one lane.
struct Zone
{
  double s_min = 0.0;
  double s_max = 0.0;
  int lane = 0;
};

/// Post-encroachment time between two tracks over `zone`, using front-bumper
/// samples: t_enter(second) - t_exit(first). Non-positive values mean the two
/// occupied the zone at the same time.
std::optional<double> pet(
  const trajdata::Track & track_a, const trajdata::Track & track_b, const Zone & zone);

}  // namespace w99sim::metrics
