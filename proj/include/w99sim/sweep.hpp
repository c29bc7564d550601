#pragma once

#include "w99sim/carfollow.hpp"
#include "w99sim/sim.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace w99sim::sweep
{

/// Variation range of one parameter and its simulator default.
struct ParamRange
{
  double start = 0.0;
  double end = 0.0;
  double default_value = 0.0;
};

/// Standard one-at-a-time variation ranges for cc0..cc9.
const std::array<ParamRange, carfollow::W99Params::kCount> & standard_ranges();

struct SweepSpec
{
  std::size_t param = 1;  ///< index into cc0..cc9
  double start = 0.0;
  double end = 0.0;
  int steps = 2;
  double altered_fraction = 0.2;
  sim::SimConfig base;  ///< non-swept parameters come from base.car.w99

  /// Throws ConfigError. A single step is allowed only when start == end.
  void validate() const;
};

/// Evenly spaced grid from start to end (inclusive).
std::vector<double> sweep_grid(const SweepSpec & spec);

struct SweepRow
{
  double value = 0.0;
  std::optional<double> min_mean_ttc;
  std::optional<double> min_min_ttc;
  std::size_t n_altered = 0;  ///< altered vehicles with statistics
  bool failed = false;        ///< run aborted on congestion
};

/// Runs one simulation per grid value, all with the same seed; the altered
/// subset of cars uses base.car.w99 with the swept parameter replaced.
/// Rows come back in grid order regardless of `jobs`.
std::vector<SweepRow> run_sweep(const SweepSpec & spec, int jobs = 1);

/// Simulates one grid point; exposed for identity checks.
SweepRow run_point(const SweepSpec & spec, double value);

struct SensitivityEntry
{
  std::size_t param = 0;
  double range = 0.0;  ///< max - min of min_min_ttc over defined rows
};

/// Orders parameters by descending range of min_min_ttc; ties by index.
/// `tables[i]` holds the sweep of cc<i>.
std::vector<SensitivityEntry> rank_sensitivity(
  std::span<const std::vector<SweepRow>> tables);

/// value,min_mean_ttc_s,min_min_ttc_s,n_altered,failed
std::string sweep_csv(const std::vector<SweepRow> & rows);

}  // namespace w99sim::sweep
