#include "w99sim/cli.hpp"
#include "w99sim/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>

namespace
{

namespace fs = std::filesystem;

const char * kSmallConfig = R"({
  "network": {"lanes": 2, "mainline_length_m": 1000, "inflow_length_m": 200},
  "classes": {"car": {"volume_veh_h": 1200}, "truck": {"volume_veh_h": 200}},
  "warmup_s": 30, "horizon_s": 150,
  "calibration": {"max_iterations": 4},
  "sensitivity": {"warmup_s": 30, "duration_s": 90}
})";

class Cli : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("w99sim_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    w99sim::io::write_file_atomic(path("small.json"), kSmallConfig);
  }

  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string & name) const { return (dir_ / name).string(); }

  int exec(const std::string & args, const std::string & stdout_file = "/dev/null") const
  {
    const std::string cmd = std::string(W99SIM_CLI_PATH) + " " + args + " >" + stdout_file + " 2>" +
                            path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string & name) const { return w99sim::io::read_file(path(name)); }

  fs::path dir_;
};

TEST_F(Cli, SimulateThenValidateAndMetrics)
{
  ASSERT_EQ(
    exec(
      "simulate --config " + path("small.json") + " --seed 4 --out-traj " + path("traj.json") +
      " --out-stats " + path("stats.csv")),
    0);
  EXPECT_EQ(exec("validate --data " + path("traj.json"), path("summary.txt")), 0);
  const auto summary = slurp("summary.txt");
  EXPECT_NE(summary.find(": ok, "), std::string::npos) << summary;
  EXPECT_NE(summary.find(" car"), std::string::npos);

  ASSERT_EQ(exec("metrics --data " + path("traj.json") + " --out " + path("ttc.csv")), 0);
  EXPECT_EQ(slurp("ttc.csv").rfind("id,min_ttc_s,mean_ttc_s,n_defined_samples\n", 0), 0u);
  EXPECT_EQ(slurp("stats.csv").rfind("id,class,mean_speed_kmh,min_ttc_s,mean_ttc_s,completed\n", 0), 0u);
}

TEST_F(Cli, SimulateIsByteIdentical)
{
  const std::string base = "simulate --config " + path("small.json") + " --seed 9 ";
  ASSERT_EQ(exec(base + "--out-traj " + path("a.json") + " --out-stats " + path("a.csv")), 0);
  ASSERT_EQ(exec(base + "--out-traj " + path("b.json") + " --out-stats " + path("b.csv")), 0);
  EXPECT_EQ(slurp("a.json"), slurp("b.json"));
  EXPECT_EQ(slurp("a.csv"), slurp("b.csv"));
}

TEST_F(Cli, HorizonNotBeyondWarmupGivesHeaderOnly)
{
  w99sim::io::write_file_atomic(path("short.json"), R"({"warmup_s": 60, "horizon_s": 60})");
  ASSERT_EQ(exec("simulate --config " + path("short.json") + " --seed 1 --out-stats " + path("s.csv")), 0);
  EXPECT_EQ(slurp("s.csv"), "id,class,mean_speed_kmh,min_ttc_s,mean_ttc_s,completed\n");
  EXPECT_NE(slurp("stderr.txt").find("warm-up"), std::string::npos);
}

TEST_F(Cli, UsageErrors)
{
  EXPECT_EQ(exec(""), 1);
  EXPECT_EQ(exec("simulate --bogus"), 1);
  EXPECT_EQ(exec("simulate"), 1);  // --seed is required
  EXPECT_EQ(exec("calibrate --data x --restarts 0 --seed 1 --out y"), 1);
  EXPECT_EQ(exec("sensitivity --param cc12 --seed 1 --out y"), 1);
  EXPECT_EQ(exec("--help"), 0);
}

TEST_F(Cli, ValidationErrors)
{
  EXPECT_EQ(exec("validate --data " + path("missing.json")), 2);
  w99sim::io::write_file_atomic(path("bad.json"), R"({"tracks": 3})");
  EXPECT_EQ(exec("validate --data " + path("bad.json")), 2);
  w99sim::io::write_file_atomic(path("bad_config.json"), R"({"dt_s": -1})");
  EXPECT_EQ(exec("simulate --config " + path("bad_config.json") + " --seed 1"), 2);
  EXPECT_EQ(exec("simulate --config " + path("nope.json") + " --seed 1"), 2);
  EXPECT_EQ(exec("sensitivity --param cc1 --start 0.5 --end 0.6 --steps 1 --seed 1 --out " + path("o.csv")), 2);
}

TEST_F(Cli, RuntimeErrorOnCongestion)
{
  w99sim::io::write_file_atomic(
    path("jam.json"), R"({"network": {"lanes": 1, "mainline_length_m": 300, "inflow_length_m": 0},
      "classes": {"car": {"volume_veh_h": 30000}}, "warmup_s": 0, "horizon_s": 600})");
  EXPECT_EQ(exec("simulate --config " + path("jam.json") + " --seed 1"), 3);
}

TEST_F(Cli, SensitivityJobsInvariant)
{
  const std::string base =
    "sensitivity --config " + path("small.json") + " --param cc1 --steps 3 --seed 5 --out ";
  ASSERT_EQ(exec(base + path("j1.csv") + " --jobs 1"), 0);
  ASSERT_EQ(exec(base + path("j3.csv") + " --jobs 3"), 0);
  EXPECT_EQ(slurp("j1.csv"), slurp("j3.csv"));
  EXPECT_EQ(slurp("j1.csv").rfind("value,min_mean_ttc_s,min_min_ttc_s,n_altered,failed\n0.1,", 0), 0u);
}

TEST_F(Cli, CalibrateJobsInvariant)
{
  ASSERT_EQ(
    exec("simulate --config " + path("small.json") + " --seed 2 --out-traj " + path("obs.json")), 0);
  const std::string base = "calibrate --config " + path("small.json") + " --data " + path("obs.json") +
                           " --restarts 2 --seed 7 ";
  ASSERT_EQ(exec(base + "--out " + path("r1.json") + " --csv " + path("r1.csv") + " --jobs 1"), 0);
  ASSERT_EQ(exec(base + "--out " + path("r2.json") + " --csv " + path("r2.csv") + " --jobs 2"), 0);
  EXPECT_EQ(slurp("r1.json"), slurp("r2.json"));
  EXPECT_EQ(slurp("r1.csv"), slurp("r2.csv"));
  EXPECT_NE(slurp("r1.json").find("mu_car_kmh"), std::string::npos);
}

TEST(CliInProcess, RunReturnsUsageForNoArguments)
{
  EXPECT_EQ(w99sim::cli::run({}), w99sim::cli::kUsage);
  EXPECT_EQ(w99sim::cli::run({"validate", "--data", "/nonexistent.json"}), w99sim::cli::kValidation);
}

}  // namespace
