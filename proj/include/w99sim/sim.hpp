#pragma once

#include "w99sim/carfollow.hpp"
#include "w99sim/lanechange.hpp"
#include "w99sim/metrics.hpp"
#include "w99sim/random.hpp"
#include "w99sim/roadnet.hpp"
#include "w99sim/trajdata.hpp"
#include "w99sim/world.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace w99sim::sim
{

/// Gaussian desired speed, truncated to [0.5 mu, 1.5 mu].
struct DesiredSpeedDistribution
{
  double mu_kmh = 0.0;
  double sigma_kmh = 0.0;

  /// Maps a uniform draw in [0, 1) to a desired speed [km/h] by inverting the
  /// truncated normal CDF, so one draw per vehicle suffices and the result is
  /// smooth in (mu, sigma).
  double sample_kmh(double u) const;
};

struct ClassSpec
{
  double volume_veh_h = 0.0;
  double length_m = 4.5;
  double width_m = 1.8;
  DesiredSpeedDistribution desired;
  carfollow::W99Params w99;
};

/// Modified car-following parameters for a random subset of cars.
struct AlteredSubset
{
  double fraction = 0.0;
  carfollow::W99Params w99;
};

struct SimConfig
{
  roadnet::RoadNetwork network = roadnet::build_highway(3, 4000.0, 1500.0);
  ClassSpec car{1680.0, 4.5, 1.8, {120.0, 15.0}, {}};
  ClassSpec truck{320.0, 16.5, 2.5, {85.0, 5.0}, {}};
  lanechange::LaneChangeParams lane_change;
  std::optional<AlteredSubset> altered;
  double dt = 0.1;
  double warmup = 600.0;
  double horizon = 2400.0;  ///< total simulated time, warm-up included
  std::uint64_t seed = 1;
  bool record_trajectories = true;
  double jam_timeout = 120.0;

  /// Throws ConfigError.
  void validate() const;
  const ClassSpec & spec(VehicleClass cls) const;
  ClassSpec & spec(VehicleClass cls);
};

struct VehicleStats
{
  std::uint64_t id = 0;
  VehicleClass cls = VehicleClass::kCar;
  bool altered = false;
  double mean_speed_kmh = 0.0;
  std::optional<double> min_ttc;
  std::optional<double> mean_ttc;
  std::size_t n_ttc = 0;
  bool completed = false;
};

struct RunSummary
{
  std::size_t spawned_car = 0;
  std::size_t spawned_truck = 0;
  std::size_t exited = 0;
  std::size_t in_network = 0;
  std::size_t still_queued = 0;
};

struct SimOutput
{
  trajdata::TrajectoryDataset trajectories;
  std::vector<VehicleStats> stats;  ///< ordered by id
  RunSummary summary;
};

/// Mean speeds of vehicles with statistics, per class [km/h].
trajdata::ObservedSpeeds stats_speeds(const SimOutput & output);

/// TTC summaries of vehicles with at least one defined TTC sample.
std::vector<metrics::TtcSummary> ttc_summaries(const SimOutput & output, bool altered_only);

/// A vehicle that has arrived but not yet entered the road.
struct PendingVehicle
{
  std::uint64_t id = 0;
  VehicleClass cls = VehicleClass::kCar;
  double arrival = 0.0;
  double v_desired = 0.0;  ///< [m/s]
  double draw = 0.5;
  bool altered = false;
};

/// Poisson arrivals per class with per-vehicle attribute draws. Each class
/// uses its own streams, so changing one class's desired-speed parameters
/// leaves every arrival time and draw unchanged.
class ArrivalProcess
{
public:
  ArrivalProcess(const SimConfig & config, std::uint64_t seed);

  /// All arrivals with time <= t not yet returned, ordered by time.
  std::vector<PendingVehicle> arrivals_until(double t);

private:
  struct ClassStream
  {
    VehicleClass cls;
    double rate = 0.0;  ///< [1/s]
    DesiredSpeedDistribution desired;
    double altered_fraction = 0.0;
    RandomStream gaps;
    RandomStream attributes;
    double next = 0.0;
  };

  void schedule(ClassStream & stream);

  std::array<ClassStream, 2> streams_;
  std::uint64_t next_id_ = 0;
};

/// One kinematic step on a world: accelerations and lane-change decisions on
/// the pre-step snapshot, Euler update with a speed floor at zero, then lane
/// changes in ascending id order (re-checked against the updated state).
/// Throws ConsistencyError if any same-lane net gap becomes negative.
void advance(World & world, double dt, const lanechange::LaneChangeParams & lane_change);

/// Throws ConsistencyError on a negative same-lane net gap.
void check_no_overlap(const World & world);

/// Fixed-step engine. Deterministic for a given config (seed included).
class Engine
{
public:
  explicit Engine(SimConfig config);

  void step();
  bool done() const { return step_ >= total_steps_; }
  double time() const;

  const World & world() const { return world_; }
  std::size_t spawned() const { return spawned_; }
  std::size_t exited() const { return exited_; }
  std::size_t queued() const { return queue_.size(); }

  /// Runs the remaining steps and collects the output.
  SimOutput finish();

private:
  void spawn(double t);
  bool try_enter(const PendingVehicle & pending, double t);
  void record(double t);
  void retire(const Vehicle & vehicle, bool completed);

  SimConfig config_;
  World world_;
  ArrivalProcess arrivals_;
  std::deque<PendingVehicle> queue_;
  long long step_ = 0;
  long long total_steps_ = 0;
  long long warmup_steps_ = 0;
  std::size_t spawned_ = 0;
  std::size_t spawned_car_ = 0;
  std::size_t spawned_truck_ = 0;
  std::size_t exited_ = 0;
  std::vector<VehicleStats> stats_;
  std::vector<trajdata::Track> tracks_;
};

SimOutput run(const SimConfig & config);

/// Per-vehicle statistics as CSV: id,class,mean_speed_kmh,min_ttc_s,mean_ttc_s,completed
std::string stats_csv(const std::vector<VehicleStats> & stats);

}  // namespace w99sim::sim
