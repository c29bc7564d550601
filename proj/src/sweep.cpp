#include "w99sim/sweep.hpp"

#include "w99sim/errors.hpp"
#include "w99sim/metrics.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace w99sim::sweep
{

const std::array<ParamRange, carfollow::W99Params::kCount> & standard_ranges()
{
  static const std::array<ParamRange, carfollow::W99Params::kCount> ranges = {{
    {0.25, 2.5, 1.5},
    {0.1, 1.0, 0.9},
    {1.0, 5.5, 4.0},
    {-2.0, -11.0, -8.0},
    {-0.1, -0.55, -0.35},
    {0.1, 0.55, 0.35},
    {8.44, 12.94, 11.44},
    {0.1, 0.55, 0.25},
    {1.0, 5.5, 3.5},
    {0.5, 5.0, 1.5},
  }};
  return ranges;
}

void SweepSpec::validate() const
{
  if (param >= carfollow::W99Params::kCount) {
    throw ConfigError(fmt::format("sweep: parameter index {} out of range", param));
  }
  if (!std::isfinite(start) || !std::isfinite(end)) {
    throw ConfigError("sweep: start and end must be finite");
  }
  if (steps < 1 || (steps == 1 && start != end)) {
    throw ConfigError(fmt::format("sweep: steps must be >= 2 (or 1 with start == end), got {}", steps));
  }
  if (!(altered_fraction >= 0.0 && altered_fraction <= 1.0)) {
    throw ConfigError("sweep: altered fraction must lie in [0, 1]");
  }
  for (double value : {start, end}) {
    carfollow::W99Params p = base.car.w99;
    p.set(param, value);
    p.validate();
  }
  base.validate();
}

std::vector<double> sweep_grid(const SweepSpec & spec)
{
  std::vector<double> grid(static_cast<std::size_t>(spec.steps));
  if (spec.steps == 1) {
    grid[0] = spec.start;
    return grid;
  }
  const double span = spec.end - spec.start;
  for (int i = 0; i < spec.steps; ++i) {
    grid[static_cast<std::size_t>(i)] =
      i == spec.steps - 1 ? spec.end : spec.start + span * i / (spec.steps - 1);
  }
  return grid;
}

SweepRow run_point(const SweepSpec & spec, double value)
{
  sim::SimConfig config = spec.base;
  config.record_trajectories = false;
  sim::AlteredSubset altered{spec.altered_fraction, config.car.w99};
  altered.w99.set(spec.param, value);
  config.altered = altered;

  SweepRow row;
  row.value = value;
  try {
    const auto output = sim::run(config);
    const auto summaries = sim::ttc_summaries(output, true);
    const auto agg = metrics::sweep_aggregate(summaries);
    row.min_mean_ttc = agg.min_mean_ttc;
    row.min_min_ttc = agg.min_min_ttc;
    row.n_altered = static_cast<std::size_t>(std::count_if(
      output.stats.begin(), output.stats.end(), [](const sim::VehicleStats & s) { return s.altered; }));
  } catch (const CongestionError & e) {
    spdlog::warn("sweep {}={} failed: {}", carfollow::param_name(spec.param), value, e.what());
    row.failed = true;
  }
  return row;
}

std::vector<SweepRow> run_sweep(const SweepSpec & spec, int jobs)
{
  spec.validate();
  const auto grid = sweep_grid(spec);
  std::vector<SweepRow> rows(grid.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        rows[i] = run_point(spec, grid[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::clamp<int>(jobs, 1, static_cast<int>(grid.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto & th : pool) {
      th.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return rows;
}

std::vector<SensitivityEntry> rank_sensitivity(std::span<const std::vector<SweepRow>> tables)
{
  if (tables.size() != carfollow::W99Params::kCount) {
    throw ConfigError(fmt::format("sensitivity ranking needs 10 tables, got {}", tables.size()));
  }
  std::vector<SensitivityEntry> out;
  for (std::size_t p = 0; p < tables.size(); ++p) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto & row : tables[p]) {
      if (!row.failed && row.min_min_ttc) {
        lo = std::min(lo, *row.min_min_ttc);
        hi = std::max(hi, *row.min_min_ttc);
      }
    }
    out.push_back({p, hi >= lo ? hi - lo : 0.0});
  }
  std::stable_sort(out.begin(), out.end(), [](const SensitivityEntry & a, const SensitivityEntry & b) {
    return a.range > b.range;
  });
  return out;
}

std::string sweep_csv(const std::vector<SweepRow> & rows)
{
  auto opt = [](const std::optional<double> & v) {
    return v ? fmt::format("{:.6g}", *v) : std::string{};
  };
  std::string out = "value,min_mean_ttc_s,min_min_ttc_s,n_altered,failed\n";
  for (const auto & r : rows) {
    out += fmt::format(
      "{:.6g},{},{},{},{}\n", r.value, opt(r.min_mean_ttc), opt(r.min_min_ttc), r.n_altered,
      r.failed ? 1 : 0);
  }
  return out;
}

}  // namespace w99sim::sweep
