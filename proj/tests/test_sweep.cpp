#include "w99sim/errors.hpp"
#include "w99sim/sweep.hpp"

#include <gtest/gtest.h>

namespace w99sim::sweep
{
namespace
{

sim::SimConfig small_base()
{
  sim::SimConfig c;
  c.network = roadnet::build_highway(3, 1500.0, 500.0);
  c.warmup = 120.0;
  c.horizon = 420.0;
  return c;
}

std::vector<SweepRow> rows_with(std::vector<double> minima)
{
  std::vector<SweepRow> rows;
  for (double m : minima) {
    SweepRow r;
    r.min_min_ttc = m;
    r.min_mean_ttc = m + 1.0;
    rows.push_back(r);
  }
  return rows;
}

TEST(Ranges, DefaultsMatchModelDefaults)
{
  const carfollow::W99Params p;
  const auto & ranges = standard_ranges();
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    EXPECT_DOUBLE_EQ(ranges[i].default_value, p.get(i)) << carfollow::param_name(i);
  }
  EXPECT_DOUBLE_EQ(ranges[1].start, 0.1);
  EXPECT_DOUBLE_EQ(ranges[1].end, 1.0);
  EXPECT_DOUBLE_EQ(ranges[3].start, -2.0);
  EXPECT_DOUBLE_EQ(ranges[3].end, -11.0);
}

TEST(Grid, EvenlySpacedInclusive)
{
  SweepSpec spec;
  spec.start = 0.1;
  spec.end = 1.0;
  spec.steps = 10;
  const auto g = sweep_grid(spec);
  ASSERT_EQ(g.size(), 10u);
  EXPECT_DOUBLE_EQ(g.front(), 0.1);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  EXPECT_NEAR(g[4], 0.5, 1e-12);
}

TEST(Spec, Validation)
{
  SweepSpec spec;
  spec.base = small_base();
  spec.start = 0.1;
  spec.end = 1.0;
  spec.steps = 1;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.steps = 10;
  spec.param = 10;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.param = 1;
  spec.start = -0.5;  // cc1 must stay positive
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.start = 0.1;
  spec.altered_fraction = 1.5;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.altered_fraction = 0.2;
  EXPECT_NO_THROW(spec.validate());
}

TEST(RunSweep, ZeroAlteredFractionGivesAbsentAggregates)
{
  SweepSpec spec;
  spec.base = small_base();
  spec.param = 1;
  spec.start = 0.5;
  spec.end = 0.9;
  spec.steps = 2;
  spec.altered_fraction = 0.0;
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto & r : rows) {
    EXPECT_FALSE(r.failed);
    EXPECT_FALSE(r.min_mean_ttc.has_value());
    EXPECT_FALSE(r.min_min_ttc.has_value());
    EXPECT_EQ(r.n_altered, 0u);
  }
}

TEST(RunSweep, SinglePointAtDefaultMatchesPlainRun)
{
  SweepSpec spec;
  spec.base = small_base();
  spec.base.seed = 31;
  spec.param = 1;
  spec.start = 0.9;
  spec.end = 0.9;
  spec.steps = 1;
  spec.altered_fraction = 0.3;
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 1u);

  auto plain = spec.base;
  plain.altered = sim::AlteredSubset{0.3, plain.car.w99};
  const auto out = sim::run(plain);
  const auto summaries = sim::ttc_summaries(out, true);
  const auto agg = metrics::sweep_aggregate(summaries);
  EXPECT_EQ(rows[0].min_mean_ttc, agg.min_mean_ttc);
  EXPECT_EQ(rows[0].min_min_ttc, agg.min_min_ttc);
  EXPECT_GT(rows[0].n_altered, 0u);
}

TEST(RunSweep, JobsDoNotChangeTheTable)
{
  SweepSpec spec;
  spec.base = small_base();
  spec.param = 3;
  spec.start = -2.0;
  spec.end = -11.0;
  spec.steps = 3;
  EXPECT_EQ(sweep_csv(run_sweep(spec, 1)), sweep_csv(run_sweep(spec, 3)));
}

TEST(RunSweep, CongestionMarksRowFailed)
{
  SweepSpec spec;
  spec.base = small_base();
  spec.base.network = roadnet::build_highway(1, 300.0, 0.0);
  spec.base.car.volume_veh_h = 30000.0;
  spec.base.warmup = 0.0;
  spec.param = 0;
  spec.start = 1.0;
  spec.end = 2.0;
  spec.steps = 2;
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(rows[0].failed);
  EXPECT_TRUE(rows[1].failed);
  EXPECT_EQ(sweep_csv(rows), "value,min_mean_ttc_s,min_min_ttc_s,n_altered,failed\n1,,,0,1\n2,,,0,1\n");
}

TEST(Rank, OnlyVaryingParameterFirst)
{
  std::vector<std::vector<SweepRow>> tables(10, rows_with({3.0, 3.0, 3.0}));
  tables[1] = rows_with({1.0, 2.0, 4.0});
  const auto ranking = rank_sensitivity(tables);
  ASSERT_EQ(ranking.size(), 10u);
  EXPECT_EQ(ranking[0].param, 1u);
  EXPECT_DOUBLE_EQ(ranking[0].range, 3.0);
}

TEST(Rank, ConstantTablesKeepIndexOrder)
{
  std::vector<std::vector<SweepRow>> tables(10, rows_with({3.0, 3.0}));
  const auto ranking = rank_sensitivity(tables);
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    EXPECT_EQ(ranking[i].param, i);
    EXPECT_EQ(ranking[i].range, 0.0);
  }
}

TEST(Rank, FailedRowsIgnored)
{
  std::vector<std::vector<SweepRow>> tables(10, rows_with({3.0, 3.0}));
  tables[4] = rows_with({3.0, 0.1});
  tables[4][1].failed = true;
  const auto ranking = rank_sensitivity(tables);
  EXPECT_EQ(ranking[0].param, 0u);
}

TEST(Rank, NeedsAllTen)
{
  std::vector<std::vector<SweepRow>> tables(9);
  EXPECT_THROW(rank_sensitivity(tables), ConfigError);
}

TEST(Csv, Format)
{
  std::vector<SweepRow> rows(2);
  rows[0] = {0.1, 4.25, 1.123456789, 12, false};
  rows[1] = {0.2, std::nullopt, std::nullopt, 0, true};
  EXPECT_EQ(
    sweep_csv(rows),
    "value,min_mean_ttc_s,min_min_ttc_s,n_altered,failed\n0.1,4.25,1.12346,12,0\n0.2,,,0,1\n");
}

}  // namespace
}  // namespace w99sim::sweep
