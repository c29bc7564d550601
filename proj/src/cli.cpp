#include "w99sim/cli.hpp"

#include "w99sim/calib.hpp"
#include "w99sim/config.hpp"
#include "w99sim/errors.hpp"
#include "w99sim/io.hpp"
#include "w99sim/metrics.hpp"
#include "w99sim/sim.hpp"
#include "w99sim/sweep.hpp"
#include "w99sim/trajdata.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>

namespace w99sim::cli
{

namespace
{

void setup_logging()
{
  static bool done = false;
  if (done) {
    return;
  }
  done = true;
  auto logger = spdlog::stderr_logger_st("w99sim");
  logger->set_pattern("w99sim: %l: %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char * env = std::getenv("W99_LOG")) {
    const std::string name(env);
    if (name == "error") {
      level = spdlog::level::err;
    } else if (name == "warn") {
      level = spdlog::level::warn;
    } else if (name == "info") {
      level = spdlog::level::info;
    } else if (name == "debug") {
      level = spdlog::level::debug;
    }
  }
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

config::AppConfig load_or_default(const std::string & path)
{
  return path.empty() ? config::AppConfig{} : config::load_config(path);
}

trajdata::TrajectoryDataset load_dataset(const std::string & path)
{
  std::vector<std::string> warnings;
  auto dataset = trajdata::parse_dataset(io::read_file(path), &warnings);
  for (const auto & w : warnings) {
    spdlog::warn("{}: {}", path, w);
  }
  return dataset;
}

struct SimulateArgs
{
  std::string config;
  std::uint64_t seed = 0;
  std::string out_traj;
  std::string out_stats;
};

void do_simulate(const SimulateArgs & a)
{
  auto cfg = load_or_default(a.config);
  cfg.sim.seed = a.seed;
  cfg.sim.record_trajectories = !a.out_traj.empty();
  if (cfg.sim.horizon <= cfg.sim.warmup) {
    spdlog::warn(
      "horizon ({} s) does not exceed warm-up ({} s); no statistics will be collected",
      cfg.sim.horizon, cfg.sim.warmup);
  }
  const auto output = sim::run(cfg.sim);
  spdlog::info(
    "simulated {} cars and {} trucks, {} exited", output.summary.spawned_car,
    output.summary.spawned_truck, output.summary.exited);
  if (!a.out_traj.empty()) {
    io::write_file_atomic(a.out_traj, trajdata::serialize_dataset(output.trajectories));
  }
  if (!a.out_stats.empty()) {
    io::write_file_atomic(a.out_stats, sim::stats_csv(output.stats));
  }
}

struct CalibrateArgs
{
  std::string data;
  std::string config;
  int restarts = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string csv;
  int jobs = 1;
};

void do_calibrate(const CalibrateArgs & a)
{
  const auto cfg = load_or_default(a.config);
  const auto dataset = load_dataset(a.data);
  const auto observed = trajdata::observed_speeds(dataset, trajdata::full_region(dataset));
  spdlog::info("observed {} cars and {} trucks", observed.n_car(), observed.n_truck());
  const auto problem = config::calibration_problem(cfg, observed);
  const auto result = calib::calibrate(problem, a.restarts, a.seed, a.jobs);
  io::write_file_atomic(a.out, calib::result_json(result));
  if (!a.csv.empty()) {
    io::write_file_atomic(a.csv, calib::runs_csv(result));
  }
}

struct SensitivityArgs
{
  std::string param;
  std::optional<double> start;
  std::optional<double> end;
  int steps = 10;
  std::string out;
  std::string config;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::optional<double> altered_fraction;
};

void do_sensitivity(const SensitivityArgs & a)
{
  const auto cfg = load_or_default(a.config);
  sweep::SweepSpec spec;
  spec.param = carfollow::param_index(a.param);
  const auto & range = sweep::standard_ranges()[spec.param];
  spec.start = a.start.value_or(range.start);
  spec.end = a.end.value_or(range.end);
  spec.steps = a.steps;
  spec.altered_fraction = a.altered_fraction.value_or(cfg.sensitivity.altered_fraction);
  spec.base = config::sensitivity_base(cfg);
  spec.base.seed = a.seed;
  const auto rows = sweep::run_sweep(spec, a.jobs);
  io::write_file_atomic(a.out, sweep::sweep_csv(rows));
}

struct DataArgs
{
  std::string data;
  std::string out;
};

void do_metrics(const DataArgs & a)
{
  const auto dataset = load_dataset(a.data);
  std::string csv = "id,min_ttc_s,mean_ttc_s,n_defined_samples\n";
  for (const auto & series : metrics::ttc_series(dataset)) {
    const auto s = metrics::summarize(series);
    csv += fmt::format("{},{:.6g},{:.6g},{}\n", s.id, s.min_ttc, s.mean_ttc, s.n_defined);
  }
  io::write_file_atomic(a.out, csv);
}

void do_validate(const DataArgs & a)
{
  const auto dataset = load_dataset(a.data);
  std::map<VehicleClass, std::size_t> counts;
  for (const auto & t : dataset.tracks) {
    ++counts[t.cls];
  }
  std::string line = fmt::format("{}: ok, {} tracks", a.data, dataset.tracks.size());
  for (const auto & [cls, n] : counts) {
    line += fmt::format(", {} {}", n, class_name(cls));
  }
  std::cout << line << '\n';
}

}  // namespace

int run(const std::vector<std::string> & args)
{
  setup_logging();

  CLI::App app{"Wiedemann99 highway simulation, calibration and sensitivity analysis", "w99sim"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto * simulate = app.add_subcommand("simulate", "Run one simulation");
  simulate->add_option("--config", sim_args.config, "Simulation config (JSON)");
  simulate->add_option("--seed", sim_args.seed, "Random seed")->required();
  simulate->add_option("--out-traj", sim_args.out_traj, "Trajectory dataset output (JSON)");
  simulate->add_option("--out-stats", sim_args.out_stats, "Per-vehicle statistics output (CSV)");

  CalibrateArgs cal_args;
  auto * calibrate = app.add_subcommand("calibrate", "Fit desired-speed distributions to a dataset");
  calibrate->add_option("--data", cal_args.data, "Observed trajectory dataset (JSON)")->required();
  calibrate->add_option("--config", cal_args.config, "Simulation config (JSON)");
  calibrate->add_option("--restarts", cal_args.restarts, "Number of Nelder-Mead restarts")
    ->required()
    ->check(CLI::PositiveNumber);
  calibrate->add_option("--seed", cal_args.seed, "Master seed for initial points")->required();
  calibrate->add_option("--out", cal_args.out, "Result output (JSON)")->required();
  calibrate->add_option("--csv", cal_args.csv, "Per-restart table output (CSV)");
  calibrate->add_option("--jobs", cal_args.jobs, "Maximum concurrent restarts")->check(CLI::PositiveNumber);

  SensitivityArgs sens_args;
  auto * sensitivity = app.add_subcommand("sensitivity", "Sweep one car-following parameter");
  sensitivity->add_option("--param", sens_args.param, "Parameter name, cc0..cc9")
    ->required()
    ->check(CLI::IsMember({"cc0", "cc1", "cc2", "cc3", "cc4", "cc5", "cc6", "cc7", "cc8", "cc9"}));
  sensitivity->add_option("--start", sens_args.start, "First grid value (default: standard range)");
  sensitivity->add_option("--end", sens_args.end, "Last grid value (default: standard range)");
  sensitivity->add_option("--steps", sens_args.steps, "Grid size")->capture_default_str()->check(CLI::PositiveNumber);
  sensitivity->add_option("--altered-fraction", sens_args.altered_fraction, "Share of cars using the swept value")
    ->check(CLI::Range(0.0, 1.0));
  sensitivity->add_option("--out", sens_args.out, "Sweep table output (CSV)")->required();
  sensitivity->add_option("--config", sens_args.config, "Simulation config (JSON)");
  sensitivity->add_option("--seed", sens_args.seed, "Random seed shared by all grid points")->required();
  sensitivity->add_option("--jobs", sens_args.jobs, "Maximum concurrent grid points")->check(CLI::PositiveNumber);

  DataArgs metrics_args;
  auto * metrics = app.add_subcommand("metrics", "Per-vehicle TTC statistics of a dataset");
  metrics->add_option("--data", metrics_args.data, "Trajectory dataset (JSON)")->required();
  metrics->add_option("--out", metrics_args.out, "TTC table output (CSV)")->required();

  DataArgs validate_args;
  auto * validate = app.add_subcommand("validate", "Check a trajectory dataset");
  validate->add_option("--data", validate_args.data, "Trajectory dataset (JSON)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e, std::cout, std::cerr);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (simulate->parsed()) {
      do_simulate(sim_args);
    } else if (calibrate->parsed()) {
      do_calibrate(cal_args);
    } else if (sensitivity->parsed()) {
      do_sensitivity(sens_args);
    } else if (metrics->parsed()) {
      do_metrics(metrics_args);
    } else if (validate->parsed()) {
      do_validate(validate_args);
    }
  } catch (const ParseError & e) {
    spdlog::error("{}", e.what());
    return kValidation;
  } catch (const trajdata::ValidationError & e) {
    spdlog::error("{}: {}", trajdata::validation_code_name(e.code()), e.what());
    return kValidation;
  } catch (const ConfigError & e) {
    spdlog::error("invalid configuration: {}", e.what());
    return kValidation;
  } catch (const CongestionError & e) {
    spdlog::error("congestion at t = {} s: {}", e.sim_time(), e.what());
    return kRuntime;
  } catch (const std::exception & e) {
    spdlog::error("{}", e.what());
    return kRuntime;
  }
  return kSuccess;
}

int main(int argc, char ** argv)
{
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    args.emplace_back(argv[i]);
  }
  return run(args);
}

}  // namespace w99sim::cli
