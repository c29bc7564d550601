#include "w99sim/metrics.hpp"

#include "w99sim/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace w99sim::metrics
{

std::optional<double> ttc(double dx_net, double v_follower, double v_leader)
{
  const double closing = v_follower - v_leader;
  if (!(closing > 0.0)) {
    return std::nullopt;
  }
  return std::max(dx_net, 0.0) / closing;
}

TtcSummary summarize(const TtcSeries & series)
{
  return TtcSummary{series.id, series.min_ttc, series.mean_ttc, series.samples.size()};
}

std::vector<PairObservation> same_lane_pairs(const trajdata::TrajectoryDataset & dataset)
{
  struct Entry
  {
    double t;
    double s;
    double v;
    double length;
    std::uint64_t id;
  };
  // (time key, lane) -> occupants
  std::map<std::pair<long long, int>, std::vector<Entry>> frames;
  for (const auto & track : dataset.tracks) {
    for (const auto & sample : track.samples) {
      const long long key = std::llround(sample.t * 1e6);
      frames[{key, sample.lane}].push_back({sample.t, sample.s, sample.v, track.length, track.id});
    }
  }

  std::vector<PairObservation> out;
  for (auto & [key, entries] : frames) {
    std::sort(entries.begin(), entries.end(), [](const Entry & a, const Entry & b) {
      return a.s != b.s ? a.s < b.s : a.id < b.id;
    });
    for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
      const Entry & f = entries[i];
      const Entry & l = entries[i + 1];
      out.push_back({f.t, f.id, l.id, std::max(l.s - l.length - f.s, 0.0), f.v, l.v});
    }
  }
  return out;
}

std::vector<TtcSeries> ttc_series(const trajdata::TrajectoryDataset & dataset)
{
  std::map<std::uint64_t, TtcSeries> by_id;
  for (const auto & obs : same_lane_pairs(dataset)) {
    if (const auto value = ttc(obs.dx_net, obs.v_follower, obs.v_leader)) {
      auto & series = by_id[obs.follower];
      series.id = obs.follower;
      series.samples.push_back({obs.t, *value});
    }
  }

  std::vector<TtcSeries> out;
  out.reserve(by_id.size());
  for (auto & [id, series] : by_id) {
    std::sort(series.samples.begin(), series.samples.end(), [](const TtcSample & a, const TtcSample & b) {
      return a.t < b.t;
    });
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto & sample : series.samples) {
      sum += sample.ttc;
      lo = std::min(lo, sample.ttc);
    }
    series.min_ttc = lo;
    series.mean_ttc = sum / static_cast<double>(series.samples.size());
    out.push_back(std::move(series));
  }
  return out;
}

SweepAggregate sweep_aggregate(std::span<const TtcSummary> summaries)
{
  SweepAggregate agg;
  for (const auto & s : summaries) {
    if (s.n_defined == 0) {
      continue;
    }
    agg.min_mean_ttc = agg.min_mean_ttc ? std::min(*agg.min_mean_ttc, s.mean_ttc) : s.mean_ttc;
    agg.min_min_ttc = agg.min_min_ttc ? std::min(*agg.min_min_ttc, s.min_ttc) : s.min_ttc;
  }
  return agg;
}

SweepAggregate sweep_aggregate(std::span<const TtcSeries> series)
{
  std::vector<TtcSummary> summaries;
  summaries.reserve(series.size());
  for (const auto & s : series) {
    summaries.push_back(summarize(s));
  }
  return sweep_aggregate(summaries);
}

namespace
{

struct Occupancy
{
  double enter = 0.0;
  double exit = 0.0;
};

// First contiguous stay of the front bumper inside the zone.
std::optional<Occupancy> occupancy(const trajdata::Track & track, const Zone & zone)
{
  std::optional<Occupancy> occ;
  for (const auto & sample : track.samples) {
    const bool inside = sample.lane == zone.lane && sample.s >= zone.s_min && sample.s <= zone.s_max;
    if (inside) {
      if (!occ) {
        occ = Occupancy{sample.t, sample.t};
      } else {
        occ->exit = sample.t;
      }
    } else if (occ) {
      break;
    }
  }
  return occ;
}

}  // namespace

std::optional<double> pet(
  const trajdata::Track & track_a, const trajdata::Track & track_b, const Zone & zone)
{
  if (!(zone.s_max > zone.s_min)) {
    throw ConfigError(fmt::format("PET zone [{}, {}] is empty", zone.s_min, zone.s_max));
  }
  const auto a = occupancy(track_a, zone);
  const auto b = occupancy(track_b, zone);
  if (!a || !b) {
    return std::nullopt;
  }
  const bool a_first = a->enter < b->enter || (a->enter == b->enter && track_a.id <= track_b.id);
  const Occupancy & first = a_first ? *a : *b;
  const Occupancy & second = a_first ? *b : *a;
  return second.enter - first.exit;
}

}  // namespace w99sim::metrics
