#include "w99sim/sim.hpp"

#include "w99sim/errors.hpp"

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace w99sim::sim
{

namespace
{

enum StreamId : std::uint32_t {
  kCarGaps = 1,
  kCarAttributes = 2,
  kTruckGaps = 3,
  kTruckAttributes = 4,
};

void require(bool ok, const std::string & what)
{
  if (!ok) {
    throw ConfigError(what);
  }
}

void validate_class(const ClassSpec & spec, std::string_view name)
{
  require(
    std::isfinite(spec.volume_veh_h) && spec.volume_veh_h >= 0.0,
    fmt::format("{}: volume must be >= 0", name));
  require(
    std::isfinite(spec.length_m) && spec.length_m > 0.0, fmt::format("{}: length must be > 0", name));
  require(std::isfinite(spec.width_m) && spec.width_m > 0.0, fmt::format("{}: width must be > 0", name));
  require(
    std::isfinite(spec.desired.mu_kmh) && spec.desired.mu_kmh > 0.0,
    fmt::format("{}: desired speed mu must be > 0", name));
  require(
    std::isfinite(spec.desired.sigma_kmh) && spec.desired.sigma_kmh > 0.0,
    fmt::format("{}: desired speed sigma must be > 0", name));
  spec.w99.validate();
}

}  // namespace

double DesiredSpeedDistribution::sample_kmh(double u) const
{
  const boost::math::normal_distribution<double> standard;
  const double half_width = 0.5 * mu_kmh / sigma_kmh;
  const double lo = boost::math::cdf(standard, -half_width);
  const double hi = boost::math::cdf(standard, half_width);
  const double p = std::clamp(lo + u * (hi - lo), std::numeric_limits<double>::min(), 1.0 - 1e-16);
  const double z = boost::math::quantile(standard, p);
  return std::clamp(mu_kmh + sigma_kmh * z, 0.5 * mu_kmh, 1.5 * mu_kmh);
}

void SimConfig::validate() const
{
  roadnet::build_highway(
    network.lane_count, network.mainline_length, network.inflow_length, network.lane_width);
  validate_class(car, "car");
  validate_class(truck, "truck");
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::isfinite(warmup) && warmup >= 0.0, "warmup must be >= 0");
  require(std::isfinite(horizon) && horizon >= 0.0, "horizon must be >= 0");
  require(jam_timeout > 0.0, "jam timeout must be > 0");
  require(
    lane_change.cooldown_s >= 0.0 && !std::isnan(lane_change.desire_threshold_kmh) &&
      lane_change.accepted_decel_own > 0.0 && lane_change.accepted_decel_follower > 0.0,
    "lane_change: invalid cooldown, desire threshold or accepted deceleration");
  if (altered) {
    require(
      altered->fraction >= 0.0 && altered->fraction <= 1.0, "altered fraction must lie in [0, 1]");
    altered->w99.validate();
  }
}

const ClassSpec & SimConfig::spec(VehicleClass cls) const
{
  return cls == VehicleClass::kTruck ? truck : car;
}

ClassSpec & SimConfig::spec(VehicleClass cls)
{
  return cls == VehicleClass::kTruck ? truck : car;
}

trajdata::ObservedSpeeds stats_speeds(const SimOutput & output)
{
  trajdata::ObservedSpeeds out;
  for (const auto & s : output.stats) {
    if (s.cls == VehicleClass::kCar) {
      out.car_speeds.push_back(s.mean_speed_kmh);
    } else if (s.cls == VehicleClass::kTruck) {
      out.truck_speeds.push_back(s.mean_speed_kmh);
    }
  }
  return out;
}

std::vector<metrics::TtcSummary> ttc_summaries(const SimOutput & output, bool altered_only)
{
  std::vector<metrics::TtcSummary> out;
  for (const auto & s : output.stats) {
    if ((altered_only && !s.altered) || s.n_ttc == 0) {
      continue;
    }
    out.push_back({s.id, *s.min_ttc, *s.mean_ttc, s.n_ttc});
  }
  return out;
}

// ---- arrivals ---------------------------------------------------------------

ArrivalProcess::ArrivalProcess(const SimConfig & config, std::uint64_t seed)
: streams_{
    ClassStream{
      VehicleClass::kCar, config.car.volume_veh_h / 3600.0, config.car.desired,
      config.altered ? config.altered->fraction : 0.0, RandomStream(seed, kCarGaps),
      RandomStream(seed, kCarAttributes), 0.0},
    ClassStream{
      VehicleClass::kTruck, config.truck.volume_veh_h / 3600.0, config.truck.desired, 0.0,
      RandomStream(seed, kTruckGaps), RandomStream(seed, kTruckAttributes), 0.0}}
{
  for (auto & stream : streams_) {
    stream.next = 0.0;
    schedule(stream);
  }
}

void ArrivalProcess::schedule(ClassStream & stream)
{
  if (stream.rate <= 0.0) {
    stream.next = std::numeric_limits<double>::infinity();
    return;
  }
  stream.next += -std::log1p(-stream.gaps.uniform()) / stream.rate;
}

std::vector<PendingVehicle> ArrivalProcess::arrivals_until(double t)
{
  std::vector<PendingVehicle> out;
  for (;;) {
    ClassStream & first = streams_[0].next <= streams_[1].next ? streams_[0] : streams_[1];
    if (!(first.next <= t)) {
      break;
    }
    PendingVehicle p;
    p.id = next_id_++;
    p.cls = first.cls;
    p.arrival = first.next;
    // Always three draws per vehicle, keeping the attribute streams aligned.
    const double u_speed = first.attributes.uniform();
    p.draw = first.attributes.uniform();
    const double u_altered = first.attributes.uniform();
    p.v_desired = first.desired.sample_kmh(u_speed) / 3.6;
    p.altered = u_altered < first.altered_fraction;
    out.push_back(p);
    schedule(first);
  }
  return out;
}

// ---- kinematics -------------------------------------------------------------

void check_no_overlap(const World & world)
{
  const auto & vehicles = world.vehicles();
  for (int lane = 0; lane < world.network().lane_count; ++lane) {
    const auto & order = world.lane_order(lane);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const Vehicle & follower = vehicles[order[i]];
      const Vehicle & leader = vehicles[order[i + 1]];
      if (net_gap(follower, leader) < 0.0) {
        throw ConsistencyError(fmt::format(
          "vehicles {} and {} overlap on lane {} (net gap {} m)", follower.id, leader.id, lane,
          net_gap(follower, leader)));
      }
    }
  }
}

void advance(World & world, double dt, const lanechange::LaneChangeParams & lane_change)
{
  auto & vehicles = world.vehicles();
  const std::size_t n = vehicles.size();
  if (n == 0) {
    return;
  }

  std::vector<double> accel(n, 0.0);
  std::vector<lanechange::Decision> decisions(n);
  for (int lane = 0; lane < world.network().lane_count; ++lane) {
    const auto & order = world.lane_order(lane);
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Vehicle & self = vehicles[order[k]];
      const Vehicle * leader = k + 1 < order.size() ? &vehicles[order[k + 1]] : nullptr;
      accel[order[k]] = carfollow::acceleration(follow_state(self, leader), self.params);
    }
  }
  if (lane_change.enabled) {
    for (std::size_t i = 0; i < n; ++i) {
      if (vehicles[i].cooldown <= 0.0) {
        decisions[i] = lanechange::evaluate_lane_change(world, vehicles[i], lane_change);
      }
    }
  }

  // Front to back per lane so each follower sees its leader's new rear
  // bumper; capping the step there keeps every same-lane gap non-negative.
  for (int lane = 0; lane < world.network().lane_count; ++lane) {
    const auto & order = world.lane_order(lane);
    for (std::size_t k = order.size(); k-- > 0;) {
      Vehicle & v = vehicles[order[k]];
      double v_new = std::max(0.0, v.v + accel[order[k]] * dt);
      if (k + 1 < order.size()) {
        const Vehicle & lead = vehicles[order[k + 1]];
        v_new = std::min(v_new, std::max(0.0, (lead.rear() - v.s) / dt));
      }
      v.a = (v_new - v.v) / dt;
      v.v = v_new;
      v.s += v_new * dt;
      v.cooldown = std::max(0.0, v.cooldown - dt);
    }
  }
  world.reindex();

  std::vector<std::size_t> movers;
  for (std::size_t i = 0; i < n; ++i) {
    if (decisions[i].direction != lanechange::Direction::kKeep) {
      movers.push_back(i);
    }
  }
  std::sort(movers.begin(), movers.end(), [&vehicles](std::size_t a, std::size_t b) {
    return vehicles[a].id < vehicles[b].id;
  });
  for (std::size_t i : movers) {
    const auto & decision = decisions[i];
    Vehicle & v = vehicles[i];
    const int from = v.lane;
    const int target = lanechange::target_lane(v, decision.direction);
    if (!lanechange::gap_acceptable(world, v, target, lane_change)) {
      continue;
    }
    const int to = lanechange::execute_lane_change(v, decision, lane_change, world.network().lane_count);
    if (to != from) {
      v.lane = from;
      world.move_to_lane(i, to);
    }
  }
  check_no_overlap(world);
}

// ---- engine -----------------------------------------------------------------

namespace
{
SimConfig validated(SimConfig config)
{
  config.validate();
  return config;
}
}  // namespace

Engine::Engine(SimConfig config)
: config_(validated(std::move(config))), world_(config_.network), arrivals_(config_, config_.seed)
{
  total_steps_ = std::llround(config_.horizon / config_.dt);
  warmup_steps_ = std::llround(config_.warmup / config_.dt);
  world_.reindex();
}

double Engine::time() const { return static_cast<double>(step_) * config_.dt; }

void Engine::step()
{
  const double t = static_cast<double>(step_ + 1) * config_.dt;
  advance(world_, config_.dt, config_.lane_change);

  // Downstream exits.
  const double end = config_.network.total_length();
  auto & vehicles = world_.vehicles();
  bool removed = false;
  for (const Vehicle & v : vehicles) {
    if (v.s >= end) {
      retire(v, true);
      ++exited_;
      removed = true;
    }
  }
  if (removed) {
    std::erase_if(vehicles, [end](const Vehicle & v) { return v.s >= end; });
    world_.reindex();
  }

  spawn(t);
  check_no_overlap(world_);

  ++step_;
  if (step_ > warmup_steps_) {
    record(t);
  }
  if (spawned_ != world_.vehicles().size() + exited_) {
    throw ConsistencyError(fmt::format(
      "vehicle count mismatch at t = {}: spawned {} != {} in network + {} exited", t, spawned_,
      world_.vehicles().size(), exited_));
  }
}

void Engine::spawn(double t)
{
  for (const auto & p : arrivals_.arrivals_until(t)) {
    queue_.push_back(p);
  }
  while (!queue_.empty()) {
    if (!try_enter(queue_.front(), t)) {
      break;
    }
    queue_.pop_front();
  }
  if (!queue_.empty() && t - queue_.front().arrival > config_.jam_timeout) {
    throw CongestionError(
      fmt::format(
        "inflow jammed: vehicle {} waited more than {} s to enter (simulated time {} s)",
        queue_.front().id, config_.jam_timeout, t),
      t);
  }
}

bool Engine::try_enter(const PendingVehicle & pending, double t)
{
  const ClassSpec & spec = config_.spec(pending.cls);
  Vehicle candidate;
  candidate.id = pending.id;
  candidate.cls = pending.cls;
  candidate.length = spec.length_m;
  candidate.width = spec.width_m;
  candidate.s = 0.0;
  candidate.v_desired = pending.v_desired;
  candidate.draw = pending.draw;
  candidate.altered = pending.altered;
  candidate.spawn_time = t;
  candidate.params = pending.altered && config_.altered ? config_.altered->w99 : spec.w99;

  std::vector<int> lanes(static_cast<std::size_t>(config_.network.lane_count));
  for (int i = 0; i < config_.network.lane_count; ++i) {
    lanes[static_cast<std::size_t>(i)] = i;
  }
  std::stable_sort(lanes.begin(), lanes.end(), [this](int a, int b) {
    return world_.lane_order(a).size() < world_.lane_order(b).size();
  });

  const auto & vehicles = world_.vehicles();
  for (int lane : lanes) {
    candidate.lane = lane;
    if (follower_of(world_, candidate, lane)) {
      continue;  // something still sits on the entry point
    }
    candidate.v = candidate.v_desired;
    if (const auto leader = leader_of(world_, candidate, lane)) {
      const Vehicle & lead = vehicles[*leader];
      if (net_gap(candidate, lead) <= 0.0) {
        continue;
      }
      auto state = follow_state(candidate, &lead);
      auto regime = carfollow::regime(state, carfollow::thresholds(state, candidate.params));
      if (
        regime == carfollow::Regime::kEmergency || regime == carfollow::Regime::kApproaching) {
        candidate.v = std::min(candidate.v_desired, lead.v);
        state = follow_state(candidate, &lead);
        regime = carfollow::regime(state, carfollow::thresholds(state, candidate.params));
        if (regime == carfollow::Regime::kEmergency) {
          continue;
        }
      }
    }
    world_.add(candidate);
    ++spawned_;
    (candidate.cls == VehicleClass::kTruck ? spawned_truck_ : spawned_car_) += 1;
    return true;
  }
  return false;
}

void Engine::record(double t)
{
  const auto & net = config_.network;
  auto & vehicles = world_.vehicles();
  for (int lane = 0; lane < net.lane_count; ++lane) {
    const auto & order = world_.lane_order(lane);
    for (std::size_t k = 0; k < order.size(); ++k) {
      Vehicle & v = vehicles[order[k]];
      if (!(v.s >= net.region_begin() && v.s < net.region_end())) {
        continue;
      }
      v.stats.speed_sum += v.v;
      ++v.stats.speed_samples;
      if (k + 1 < order.size()) {
        const Vehicle & lead = vehicles[order[k + 1]];
        if (const auto value = metrics::ttc(net_gap(v, lead), v.v, lead.v)) {
          v.stats.ttc_min = std::min(v.stats.ttc_min, *value);
          v.stats.ttc_sum += *value;
          ++v.stats.ttc_samples;
        }
      }
      if (config_.record_trajectories) {
        if (v.record_slot == std::numeric_limits<std::size_t>::max()) {
          v.record_slot = tracks_.size();
          trajdata::Track track;
          track.id = v.id;
          track.cls = v.cls;
          track.length = v.length;
          track.width = v.width;
          tracks_.push_back(std::move(track));
        }
        const double y = (static_cast<double>(v.lane) + 0.5) * net.lane_width;
        tracks_[v.record_slot].samples.push_back({t, v.s, y, v.s, v.lane, v.v});
      }
    }
  }
}

void Engine::retire(const Vehicle & v, bool completed)
{
  if (v.stats.speed_samples < 2) {
    return;
  }
  VehicleStats s;
  s.id = v.id;
  s.cls = v.cls;
  s.altered = v.altered;
  s.mean_speed_kmh = v.stats.speed_sum / static_cast<double>(v.stats.speed_samples) * 3.6;
  if (v.stats.ttc_samples > 0) {
    s.min_ttc = v.stats.ttc_min;
    s.mean_ttc = v.stats.ttc_sum / static_cast<double>(v.stats.ttc_samples);
    s.n_ttc = v.stats.ttc_samples;
  }
  s.completed = completed;
  stats_.push_back(s);
}

SimOutput Engine::finish()
{
  while (!done()) {
    step();
  }
  for (const Vehicle & v : world_.vehicles()) {
    retire(v, false);
  }

  SimOutput out;
  out.summary.spawned_car = spawned_car_;
  out.summary.spawned_truck = spawned_truck_;
  out.summary.exited = exited_;
  out.summary.in_network = world_.vehicles().size();
  out.summary.still_queued = queue_.size();

  out.stats = std::move(stats_);
  std::sort(out.stats.begin(), out.stats.end(), [](const VehicleStats & a, const VehicleStats & b) {
    return a.id < b.id;
  });

  auto & ds = out.trajectories;
  ds.meta.timestamp = "1970-01-01T00:00:00Z";
  ds.meta.location = "synthetic straight highway";
  ds.meta.provenance = trajdata::Provenance::kSimulated;
  ds.meta.source_method = fmt::format(
    "w99sim seed={} dt={} warmup={} horizon={} spawned={} queued_at_end={}", config_.seed,
    config_.dt, config_.warmup, config_.horizon, spawned_, queue_.size());
  ds.tracks = std::move(tracks_);
  std::sort(ds.tracks.begin(), ds.tracks.end(), [](const trajdata::Track & a, const trajdata::Track & b) {
    return a.id < b.id;
  });
  return out;
}

SimOutput run(const SimConfig & config)
{
  Engine engine(config);
  return engine.finish();
}

std::string stats_csv(const std::vector<VehicleStats> & stats)
{
  std::string out = "id,class,mean_speed_kmh,min_ttc_s,mean_ttc_s,completed\n";
  for (const auto & s : stats) {
    out += fmt::format(
      "{},{},{:.6g},{},{},{}\n", s.id, class_name(s.cls), s.mean_speed_kmh,
      s.min_ttc ? fmt::format("{:.6g}", *s.min_ttc) : std::string{},
      s.mean_ttc ? fmt::format("{:.6g}", *s.mean_ttc) : std::string{}, s.completed ? 1 : 0);
  }
  return out;
}

}  // namespace w99sim::sim
