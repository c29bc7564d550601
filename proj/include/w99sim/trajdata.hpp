#pragma once

#include "w99sim/roadnet.hpp"
#include "w99sim/world.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace w99sim::trajdata
{

enum class Provenance { kNatural, kStaged, kSimulated };

std::string_view provenance_name(Provenance p);

struct DatasetMeta
{
  std::string timestamp;  ///< ISO-8601
  std::string location;
  std::optional<double> lat;
  std::optional<double> lon;
  Provenance provenance = Provenance::kNatural;
  std::string source_method;

  bool operator==(const DatasetMeta &) const = default;
};

/// One map-referenced observation. `s` is the front-bumper position.
struct Sample
{
  double t = 0.0;  ///< [s]
  double x = 0.0;  ///< [m]
  double y = 0.0;  ///< [m]
  double s = 0.0;  ///< [m]
  int lane = 0;
  double v = 0.0;  ///< [m/s]

  bool operator==(const Sample &) const = default;
};

struct Track
{
  std::uint64_t id = 0;
  VehicleClass cls = VehicleClass::kCar;
  std::optional<std::map<VehicleClass, double>> class_pmf;
  double length = 0.0;
  double width = 0.0;
  std::vector<Sample> samples;
  /// Gaussian standard deviations keyed by field name (t, x, y, s, v, length, width).
  std::optional<std::map<std::string, double>> sigma;

  bool operator==(const Track &) const = default;
};

struct OcclusionInterval
{
  double s_min = 0.0;
  double s_max = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;

  bool operator==(const OcclusionInterval &) const = default;
};

struct TrajectoryDataset
{
  DatasetMeta meta;
  std::vector<Track> tracks;
  std::vector<OcclusionInterval> occlusions;

  bool operator==(const TrajectoryDataset &) const = default;
};

/// Per-class lists of per-track mean speeds [km/h].
struct ObservedSpeeds
{
  std::vector<double> car_speeds;
  std::vector<double> truck_speeds;

  std::size_t n_car() const { return car_speeds.size(); }
  std::size_t n_truck() const { return truck_speeds.size(); }
};

enum class ValidationCode {
  kDuplicateTrackId,
  kNonIncreasingTime,
  kPmfSum,
  kPmfMode,
  kPmfValue,
  kNonPositiveSize,
  kSampleRate,
  kNonFinite,
  kNegativeLane,
  kNegativeSpeed,
  kBadTimestamp,
  kBadProvenance,
  kUnknownClass,
  kNegativeSigma,
  kBadOcclusion,
  kInconsistentCoordinates,
};

std::string_view validation_code_name(ValidationCode code);

class ValidationError : public std::runtime_error
{
public:
  ValidationError(ValidationCode code, const std::string & what)
  : std::runtime_error(what), code_(code)
  {
  }
  ValidationCode code() const { return code_; }

private:
  ValidationCode code_;
};

/// Median sample spacing above which the validator warns / rejects [s].
inline constexpr double kSampleWarnDt = 0.1;
inline constexpr double kSampleMaxDt = 0.5;
inline constexpr double kPmfTolerance = 1e-9;

/// Throws ValidationError on the first violated invariant; returns warnings.
std::vector<std::string> validate(const TrajectoryDataset & dataset);

/// Parses and validates a JSON document. Schema problems raise ParseError
/// (with a JSON path), invariant violations ValidationError.
TrajectoryDataset parse_dataset(std::string_view text, std::vector<std::string> * warnings = nullptr);

/// Compact JSON; floats are written shortest-round-trip.
std::string serialize_dataset(const TrajectoryDataset & dataset);

/// Mean of sample speeds inside `region` [km/h]; nullopt below two samples.
std::optional<double> mean_speed(const Track & track, const roadnet::Region & region);

ObservedSpeeds observed_speeds(const TrajectoryDataset & dataset, const roadnet::Region & region);

/// Region spanning every sample of the dataset.
roadnet::Region full_region(const TrajectoryDataset & dataset);

struct NearMiss
{
  std::uint64_t follower = 0;
  std::uint64_t leader = 0;
  double min_ttc = 0.0;
  double t_at_min = 0.0;
};

/// Default TTC threshold [s] below which a same-lane encounter is tagged.
inline constexpr double kDefaultNearMissTtc = 2.0;

/// Same-lane follower/leader pairs whose minimum TTC is below `ttc_threshold`,
/// ordered by (follower, leader).
std::vector<NearMiss> tag_near_miss(const TrajectoryDataset & dataset, double ttc_threshold);

}  // namespace w99sim::trajdata
