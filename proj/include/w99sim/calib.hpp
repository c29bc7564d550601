#pragma once

#include "w99sim/sim.hpp"
#include "w99sim/trajdata.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace w99sim::calib
{

// ---- kernel density ---------------------------------------------------------

/// Gaussian kernel density over speed samples [km/h].
struct Density
{
  std::vector<double> samples;
  double bandwidth = 1.0;
};

/// Lower bound applied to densities before taking logarithms.
inline constexpr double kDensityFloor = 1e-300;

/// Silverman's rule: 0.9 * min(std, IQR / 1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);

/// Throws DegenerateDensityError for fewer than two samples or zero spread.
/// `bandwidth`, when given, overrides Silverman's rule.
Density kde_fit(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt);

/// (1 / (n h)) * sum_i K((x - x_i) / h), floored at kDensityFloor.
double kde_eval(const Density & density, double x);

// ---- likelihood -------------------------------------------------------------

using DensityFn = std::function<double(double)>;

/// -sum_k ln phi_car(v_car,k) - sum_l ln phi_truck(v_truck,l), each density
/// floored at kDensityFloor before the logarithm.
double neg_log_likelihood(
  const DensityFn & car, const DensityFn & truck, const trajdata::ObservedSpeeds & observed);

double neg_log_likelihood(
  const Density & car, const Density & truck, const trajdata::ObservedSpeeds & observed);

// ---- Nelder-Mead ------------------------------------------------------------

struct NelderMeadOptions
{
  double xatol = 1e-3;
  double fatol = 1e-6;
  int max_iterations = 500;
  /// Dimension-dependent coefficients (Gao & Han); standard ones otherwise.
  bool adaptive = true;
  /// Relative step used to build the initial simplex around x0.
  double initial_step = 0.05;
  /// Absolute per-coordinate simplex offsets; overrides initial_step when set.
  std::vector<double> initial_steps;
};

struct NelderMeadResult
{
  std::vector<double> x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Throws OptimizerInitError when x0 is empty, non-finite, or f(x0) is not finite.
NelderMeadResult nelder_mead(const Objective & f, std::vector<double> x0, const NelderMeadOptions & options = {});

// ---- calibration ------------------------------------------------------------

/// (mu_car, sigma_car, mu_truck, sigma_truck) [km/h]
using Theta = std::array<double, 4>;

inline constexpr std::array<const char *, 4> kThetaNames = {
  "mu_car_kmh", "sigma_car_kmh", "mu_truck_kmh", "sigma_truck_kmh"};

struct Bounds
{
  Theta lower{80.0, 1.0, 60.0, 1.0};
  Theta upper{200.0, 40.0, 120.0, 20.0};
};

inline constexpr double kPenalty = 1e9;

/// Termination settings for calibration runs: 0.01 km/h and 1e-3 in the
/// objective are well below the simulator's resolution of either.
inline NelderMeadOptions calibration_optimizer()
{
  NelderMeadOptions options;
  options.xatol = 0.01;
  options.fatol = 1e-3;
  return options;
}

struct CalibrationProblem
{
  trajdata::ObservedSpeeds observed;
  sim::SimConfig base;  ///< desired-speed distributions are overwritten by theta
  Bounds bounds;
  /// Single simulation seed shared by every evaluation (common random numbers).
  std::uint64_t eval_seed = 1;
  std::optional<double> bandwidth;
  /// Without explicit initial_steps, each simplex edge spans
  /// simplex_fraction of the bound width.
  NelderMeadOptions optimizer = calibration_optimizer();
  double simplex_fraction = 0.1;

  /// Throws ConfigError.
  void validate() const;
};

/// Simulation-backed negative log-likelihood. Out-of-bounds theta returns
/// kPenalty plus the distance outside the box; congestion or degenerate
/// simulated densities return kPenalty.
double objective(const Theta & theta, const CalibrationProblem & problem);

struct RunRecord
{
  int restart = 0;
  Theta initial{};
  Theta final{};
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

struct CalibrationResult
{
  Theta best{};
  double best_objective = 0.0;
  std::vector<RunRecord> runs;  ///< ordered by restart index
};

/// Multi-start Nelder-Mead with initial points drawn uniformly inside the
/// bounds from `master_seed`. Restarts may run on up to `jobs` threads; the
/// result does not depend on `jobs`. Throws CalibrationError if every restart
/// ends on a penalty.
CalibrationResult calibrate(
  const CalibrationProblem & problem, int n_restarts, std::uint64_t master_seed, int jobs = 1);

/// Same as calibrate but every restart starts from the given points.
CalibrationResult calibrate_from(
  const CalibrationProblem & problem, const std::vector<Theta> & starts, int jobs = 1);

std::string result_json(const CalibrationResult & result);
/// restart,mu_car_kmh,sigma_car_kmh,mu_truck_kmh,sigma_truck_kmh,objective
std::string runs_csv(const CalibrationResult & result);

}  // namespace w99sim::calib
