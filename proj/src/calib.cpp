#include "w99sim/calib.hpp"

#include "w99sim/errors.hpp"
#include "w99sim/random.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

namespace w99sim::calib
{

namespace
{

constexpr std::uint32_t kRestartStream = 100;

// Linear-interpolated quantile of sorted data (the usual "type 7").
double quantile_sorted(std::span<const double> sorted, double q)
{
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples)
{
  const auto n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) {
    ss += (x - mean) * (x - mean);
  }
  const double sd = std::sqrt(ss / (n - 1.0));
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) {
    spread = sd;  // heavy ties in the middle; fall back to the standard deviation
  }
  return 0.9 * spread * std::pow(n, -0.2);
}

Density kde_fit(std::span<const double> samples, std::optional<double> bandwidth)
{
  if (samples.size() < 2) {
    throw DegenerateDensityError(
      fmt::format("kernel density needs at least 2 samples, got {}", samples.size()));
  }
  for (double x : samples) {
    if (!std::isfinite(x)) {
      throw DegenerateDensityError("kernel density samples must be finite");
    }
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) {
    throw DegenerateDensityError("kernel density samples have zero spread");
  }
  Density d;
  d.samples.assign(samples.begin(), samples.end());
  d.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  if (!std::isfinite(d.bandwidth) || d.bandwidth <= 0.0) {
    throw DegenerateDensityError(fmt::format("invalid kernel bandwidth {}", d.bandwidth));
  }
  return d;
}

double kde_eval(const Density & density, double x)
{
  const double h = density.bandwidth;
  double sum = 0.0;
  for (double xi : density.samples) {
    const double u = (x - xi) / h;
    sum += std::exp(-0.5 * u * u);
  }
  const double norm = std::numbers::inv_sqrtpi / std::numbers::sqrt2;  // 1 / sqrt(2 pi)
  const double value = norm * sum / (static_cast<double>(density.samples.size()) * h);
  return std::max(value, kDensityFloor);
}

double neg_log_likelihood(
  const DensityFn & car, const DensityFn & truck, const trajdata::ObservedSpeeds & observed)
{
  double nll = 0.0;
  for (double v : observed.car_speeds) {
    nll -= std::log(std::max(car(v), kDensityFloor));
  }
  for (double v : observed.truck_speeds) {
    nll -= std::log(std::max(truck(v), kDensityFloor));
  }
  return nll;
}

double neg_log_likelihood(
  const Density & car, const Density & truck, const trajdata::ObservedSpeeds & observed)
{
  return neg_log_likelihood(
    [&car](double x) { return kde_eval(car, x); }, [&truck](double x) { return kde_eval(truck, x); },
    observed);
}

// ---- Nelder-Mead ------------------------------------------------------------

NelderMeadResult nelder_mead(const Objective & f, std::vector<double> x0, const NelderMeadOptions & options)
{
  const std::size_t n = x0.size();
  if (n == 0) {
    throw OptimizerInitError("Nelder-Mead needs at least one dimension");
  }
  for (double v : x0) {
    if (!std::isfinite(v)) {
      throw OptimizerInitError("Nelder-Mead start point must be finite");
    }
  }
  if (!options.initial_steps.empty()) {
    if (options.initial_steps.size() != n) {
      throw OptimizerInitError(fmt::format(
        "Nelder-Mead got {} initial steps for {} dimensions", options.initial_steps.size(), n));
    }
    for (double step : options.initial_steps) {
      if (!std::isfinite(step) || step == 0.0) {
        throw OptimizerInitError("Nelder-Mead initial steps must be finite and nonzero");
      }
    }
  }

  NelderMeadResult result;
  auto eval = [&](const std::vector<double> & x) {
    ++result.evaluations;
    const double value = f(x);
    return std::isnan(value) ? std::numeric_limits<double>::infinity() : value;
  };

  const double f0 = eval(x0);
  if (!std::isfinite(f0)) {
    throw OptimizerInitError(fmt::format("objective is not finite at the start point ({})", f0));
  }

  const double dim = static_cast<double>(n);
  const double rho = 1.0;
  const double chi = options.adaptive ? 1.0 + 2.0 / dim : 2.0;
  const double psi = options.adaptive ? 0.75 - 1.0 / (2.0 * dim) : 0.5;
  const double sigma = options.adaptive ? 1.0 - 1.0 / dim : 0.5;

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fs(n + 1, f0);
  for (std::size_t k = 0; k < n; ++k) {
    auto & vertex = simplex[k + 1];
    if (!options.initial_steps.empty()) {
      vertex[k] += options.initial_steps[k];
    } else {
      vertex[k] = vertex[k] != 0.0 ? (1.0 + options.initial_step) * vertex[k] : 0.00025;
    }
    fs[k + 1] = eval(vertex);
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    s2.reserve(n + 1);
    f2.reserve(n + 1);
    for (std::size_t i : order) {
      s2.push_back(std::move(simplex[i]));
      f2.push_back(fs[i]);
    }
    simplex = std::move(s2);
    fs = std::move(f2);
  };

  auto combine = [n](const std::vector<double> & a, double wa, const std::vector<double> & b, double wb) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = wa * a[i] + wb * b[i];
    }
    return out;
  };

  sort_simplex();
  for (;;) {
    double xspread = 0.0;
    double fspread = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        xspread = std::max(xspread, std::abs(simplex[j][i] - simplex[0][i]));
      }
      fspread = std::max(fspread, std::abs(fs[j] - fs[0]));
    }
    if (xspread <= options.xatol && fspread <= options.fatol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) {
      break;
    }
    ++result.iterations;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        centroid[i] += simplex[j][i] / dim;
      }
    }
    const auto & worst = simplex[n];

    const auto xr = combine(centroid, 1.0 + rho, worst, -rho);
    const double fr = eval(xr);
    bool shrink = false;
    if (fr < fs[0]) {
      const auto xe = combine(centroid, 1.0 + rho * chi, worst, -rho * chi);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fs[n] = fe;
      } else {
        simplex[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      simplex[n] = xr;
      fs[n] = fr;
    } else if (fr < fs[n]) {
      const auto xc = combine(centroid, 1.0 + psi * rho, worst, -psi * rho);
      const double fc = eval(xc);
      if (fc <= fr) {
        simplex[n] = xc;
        fs[n] = fc;
      } else {
        shrink = true;
      }
    } else {
      const auto xcc = combine(centroid, 1.0 - psi, worst, psi);
      const double fcc = eval(xcc);
      if (fcc < fs[n]) {
        simplex[n] = xcc;
        fs[n] = fcc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t j = 1; j <= n; ++j) {
        simplex[j] = combine(simplex[0], 1.0 - sigma, simplex[j], sigma);
        fs[j] = eval(simplex[j]);
      }
    }
    sort_simplex();
  }

  result.x = simplex[0];
  result.f = fs[0];
  return result;
}

// ---- calibration ------------------------------------------------------------

void CalibrationProblem::validate() const
{
  for (std::size_t i = 0; i < 4; ++i) {
    if (!(bounds.lower[i] < bounds.upper[i])) {
      throw ConfigError(fmt::format(
        "calibration bounds for {}: lower {} must be below upper {}", kThetaNames[i],
        bounds.lower[i], bounds.upper[i]));
    }
  }
  if (observed.car_speeds.empty() && observed.truck_speeds.empty()) {
    throw ConfigError("calibration needs at least one observed car or truck speed");
  }
  if (!(simplex_fraction > 0.0 && simplex_fraction <= 1.0)) {
    throw ConfigError(fmt::format("simplex fraction must lie in (0, 1], got {}", simplex_fraction));
  }
  base.validate();
}

double objective(const Theta & theta, const CalibrationProblem & problem)
{
  double outside = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!std::isfinite(theta[i])) {
      return std::numeric_limits<double>::infinity();
    }
    outside += std::max(0.0, problem.bounds.lower[i] - theta[i]);
    outside += std::max(0.0, theta[i] - problem.bounds.upper[i]);
  }
  if (outside > 0.0) {
    return kPenalty + outside;
  }

  sim::SimConfig config = problem.base;
  config.car.desired = {theta[0], theta[1]};
  config.truck.desired = {theta[2], theta[3]};
  config.seed = problem.eval_seed;
  config.record_trajectories = false;

  sim::SimOutput output;
  try {
    output = sim::run(config);
  } catch (const CongestionError & e) {
    spdlog::warn(
      "objective at ({:.4g}, {:.4g}, {:.4g}, {:.4g}) penalized: {}", theta[0], theta[1], theta[2],
      theta[3], e.what());
    return kPenalty;
  }

  const auto simulated = sim::stats_speeds(output);
  try {
    Density car;
    Density truck;
    if (!problem.observed.car_speeds.empty()) {
      car = kde_fit(simulated.car_speeds, problem.bandwidth);
    }
    if (!problem.observed.truck_speeds.empty()) {
      truck = kde_fit(simulated.truck_speeds, problem.bandwidth);
    }
    return neg_log_likelihood(car, truck, problem.observed);
  } catch (const DegenerateDensityError & e) {
    spdlog::warn(
      "objective at ({:.4g}, {:.4g}, {:.4g}, {:.4g}) penalized: {}", theta[0], theta[1], theta[2],
      theta[3], e.what());
    return kPenalty;
  }
}

namespace
{

RunRecord run_restart(const CalibrationProblem & problem, int index, const Theta & start)
{
  auto f = [&problem](std::span<const double> x) {
    return objective(Theta{x[0], x[1], x[2], x[3]}, problem);
  };
  RunRecord rec;
  rec.restart = index;
  rec.initial = start;
  NelderMeadOptions options = problem.optimizer;
  if (options.initial_steps.empty()) {
    for (std::size_t i = 0; i < start.size(); ++i) {
      options.initial_steps.push_back(problem.simplex_fraction * (problem.bounds.upper[i] - problem.bounds.lower[i]));
    }
  }
  const auto nm = nelder_mead(f, std::vector<double>(start.begin(), start.end()), options);
  std::copy(nm.x.begin(), nm.x.end(), rec.final.begin());
  rec.objective = nm.f;
  rec.iterations = nm.iterations;
  rec.evaluations = nm.evaluations;
  rec.converged = nm.converged;
  spdlog::info(
    "restart {}: objective {:.6f} at ({:.3f}, {:.3f}, {:.3f}, {:.3f}) after {} iterations{}", index,
    rec.objective, rec.final[0], rec.final[1], rec.final[2], rec.final[3], rec.iterations,
    rec.converged ? "" : " (not converged)");
  return rec;
}

}  // namespace

CalibrationResult calibrate_from(
  const CalibrationProblem & problem, const std::vector<Theta> & starts, int jobs)
{
  problem.validate();
  if (starts.empty()) {
    throw ConfigError("calibration needs at least one restart");
  }

  std::vector<RunRecord> runs(starts.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        runs[i] = run_restart(problem, static_cast<int>(i), starts[i]);
      } catch (const OptimizerInitError &) {
        // Start point evaluated to a non-finite value; keep it as a failed run.
        runs[i] = RunRecord{static_cast<int>(i), starts[i], starts[i], std::numeric_limits<double>::infinity(), 0, 1, false};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };

  const auto n_threads = static_cast<std::size_t>(std::clamp<int>(jobs, 1, static_cast<int>(starts.size())));
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

  CalibrationResult result;
  result.runs = std::move(runs);
  std::size_t best = 0;
  for (std::size_t i = 1; i < result.runs.size(); ++i) {
    if (result.runs[i].objective < result.runs[best].objective) {
      best = i;
    }
  }
  if (!(result.runs[best].objective < kPenalty)) {
    throw CalibrationError("calibration failed: every restart ended on a penalized objective");
  }
  result.best = result.runs[best].final;
  result.best_objective = result.runs[best].objective;
  return result;
}

CalibrationResult calibrate(
  const CalibrationProblem & problem, int n_restarts, std::uint64_t master_seed, int jobs)
{
  if (n_restarts < 1) {
    throw ConfigError(fmt::format("restarts must be >= 1, got {}", n_restarts));
  }
  RandomStream rng(master_seed, kRestartStream);
  std::vector<Theta> starts(static_cast<std::size_t>(n_restarts));
  for (auto & start : starts) {
    for (std::size_t i = 0; i < start.size(); ++i) {
      start[i] = rng.uniform(problem.bounds.lower[i], problem.bounds.upper[i]);
    }
  }
  return calibrate_from(problem, starts, jobs);
}

std::string result_json(const CalibrationResult & result)
{
  using nlohmann::json;
  auto theta_json = [](const Theta & t) {
    json j = json::object();
    for (std::size_t i = 0; i < t.size(); ++i) {
      j[kThetaNames[i]] = t[i];
    }
    return j;
  };
  json runs = json::array();
  for (const auto & r : result.runs) {
    runs.push_back({
      {"restart", r.restart},
      {"initial", theta_json(r.initial)},
      {"final", theta_json(r.final)},
      {"objective", std::isfinite(r.objective) ? json(r.objective) : json(nullptr)},
      {"iterations", r.iterations},
      {"evaluations", r.evaluations},
      {"converged", r.converged},
    });
  }
  json root = {
    {"best", theta_json(result.best)},
    {"objective", result.best_objective},
    {"runs", std::move(runs)},
  };
  return root.dump(2) + "\n";
}

std::string runs_csv(const CalibrationResult & result)
{
  std::string out = "restart,mu_car_kmh,sigma_car_kmh,mu_truck_kmh,sigma_truck_kmh,objective\n";
  for (const auto & r : result.runs) {
    out += fmt::format(
      "{},{:.6g},{:.6g},{:.6g},{:.6g},{}\n", r.restart, r.final[0], r.final[1], r.final[2], r.final[3],
      std::isfinite(r.objective) ? fmt::format("{:.6g}", r.objective) : std::string{});
  }
  return out;
}

}  // namespace w99sim::calib
