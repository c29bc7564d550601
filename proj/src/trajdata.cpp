#include "w99sim/trajdata.hpp"

#include "w99sim/errors.hpp"
#include "w99sim/metrics.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>
#include <set>

namespace w99sim::trajdata
{

using nlohmann::json;

namespace
{

constexpr std::array<std::string_view, 3> kProvenanceNames = {"natural", "staged", "simulated"};
const std::set<std::string, std::less<>> kSigmaFields = {"t", "x", "y", "s", "v", "length", "width"};

[[noreturn]] void fail(ValidationCode code, const std::string & what)
{
  throw ValidationError(code, what);
}

Provenance parse_provenance(std::string_view name)
{
  for (std::size_t i = 0; i < kProvenanceNames.size(); ++i) {
    if (kProvenanceNames[i] == name) {
      return static_cast<Provenance>(i);
    }
  }
  fail(
    ValidationCode::kBadProvenance,
    fmt::format("meta.provenance: '{}' is not one of natural, staged, simulated", name));
}

VehicleClass class_or_fail(std::string_view name, const std::string & path)
{
  try {
    return parse_class(name);
  } catch (const ParseError &) {
    fail(ValidationCode::kUnknownClass, fmt::format("{}: unknown class '{}'", path, name));
  }
}

// ---- schema helpers -------------------------------------------------------

const json & field(const json & obj, const char * key, const std::string & path)
{
  if (!obj.is_object()) {
    throw ParseError(fmt::format("{}: expected an object", path));
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(fmt::format("{}.{}: missing required field", path, key));
  }
  return *it;
}

double number(const json & value, const std::string & path)
{
  if (!value.is_number()) {
    throw ParseError(fmt::format("{}: expected a number", path));
  }
  return value.get<double>();
}

std::string string(const json & value, const std::string & path)
{
  if (!value.is_string()) {
    throw ParseError(fmt::format("{}: expected a string", path));
  }
  return value.get<std::string>();
}

int integer(const json & value, const std::string & path)
{
  if (value.is_number_integer()) {
    return value.get<int>();
  }
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e9) {
      return static_cast<int>(d);
    }
  }
  throw ParseError(fmt::format("{}: expected an integer", path));
}

DatasetMeta parse_meta(const json & j)
{
  const std::string path = "$.meta";
  DatasetMeta meta;
  meta.timestamp = string(field(j, "timestamp", path), path + ".timestamp");
  meta.location = string(field(j, "location", path), path + ".location");
  meta.provenance = parse_provenance(string(field(j, "provenance", path), path + ".provenance"));
  meta.source_method = string(field(j, "source_method", path), path + ".source_method");
  if (auto it = j.find("lat"); it != j.end()) {
    meta.lat = number(*it, path + ".lat");
  }
  if (auto it = j.find("lon"); it != j.end()) {
    meta.lon = number(*it, path + ".lon");
  }
  return meta;
}

Track parse_track(const json & j, const std::string & path)
{
  Track track;
  const json & id = field(j, "id", path);
  if (!id.is_number_unsigned() && !(id.is_number_integer() && id.get<std::int64_t>() >= 0)) {
    throw ParseError(fmt::format("{}.id: expected a non-negative integer", path));
  }
  track.id = id.get<std::uint64_t>();
  track.cls = class_or_fail(string(field(j, "class", path), path + ".class"), path + ".class");
  track.length = number(field(j, "length_m", path), path + ".length_m");
  track.width = number(field(j, "width_m", path), path + ".width_m");

  if (auto it = j.find("class_pmf"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) {
      throw ParseError(fmt::format("{}.class_pmf: expected an object", path));
    }
    std::map<VehicleClass, double> pmf;
    for (const auto & [name, p] : it->items()) {
      const std::string ppath = fmt::format("{}.class_pmf.{}", path, name);
      pmf[class_or_fail(name, ppath)] = number(p, ppath);
    }
    track.class_pmf = std::move(pmf);
  }

  if (auto it = j.find("sigma"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) {
      throw ParseError(fmt::format("{}.sigma: expected an object", path));
    }
    std::map<std::string, double> sigma;
    for (const auto & [name, value] : it->items()) {
      const std::string spath = fmt::format("{}.sigma.{}", path, name);
      if (!kSigmaFields.contains(name)) {
        throw ParseError(fmt::format("{}: unknown sigma field", spath));
      }
      sigma[name] = number(value, spath);
    }
    track.sigma = std::move(sigma);
  }

  const json & samples = field(j, "samples", path);
  if (!samples.is_array()) {
    throw ParseError(fmt::format("{}.samples: expected an array", path));
  }
  track.samples.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string spath = fmt::format("{}.samples[{}]", path, i);
    const json & row = samples[i];
    if (!row.is_array() || row.size() != 6) {
      throw ParseError(fmt::format("{}: expected [t, x, y, s, lane, v]", spath));
    }
    Sample s;
    s.t = number(row[0], spath + "[0]");
    s.x = number(row[1], spath + "[1]");
    s.y = number(row[2], spath + "[2]");
    s.s = number(row[3], spath + "[3]");
    s.lane = integer(row[4], spath + "[4]");
    s.v = number(row[5], spath + "[5]");
    track.samples.push_back(s);
  }
  return track;
}

OcclusionInterval parse_occlusion(const json & j, const std::string & path)
{
  OcclusionInterval occ;
  occ.s_min = number(field(j, "s_min", path), path + ".s_min");
  occ.s_max = number(field(j, "s_max", path), path + ".s_max");
  occ.t_min = number(field(j, "t_min", path), path + ".t_min");
  occ.t_max = number(field(j, "t_max", path), path + ".t_max");
  return occ;
}

double median(std::vector<double> values)
{
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

void require_finite(double value, const std::string & what)
{
  if (!std::isfinite(value)) {
    fail(ValidationCode::kNonFinite, fmt::format("{}: value must be finite", what));
  }
}

}  // namespace

std::string_view provenance_name(Provenance p)
{
  return kProvenanceNames[static_cast<std::size_t>(p)];
}

std::string_view validation_code_name(ValidationCode code)
{
  switch (code) {
    case ValidationCode::kDuplicateTrackId:
      return "duplicate_track_id";
    case ValidationCode::kNonIncreasingTime:
      return "non_increasing_time";
    case ValidationCode::kPmfSum:
      return "pmf_sum";
    case ValidationCode::kPmfMode:
      return "pmf_mode";
    case ValidationCode::kPmfValue:
      return "pmf_value";
    case ValidationCode::kNonPositiveSize:
      return "non_positive_size";
    case ValidationCode::kSampleRate:
      return "sample_rate";
    case ValidationCode::kNonFinite:
      return "non_finite";
    case ValidationCode::kNegativeLane:
      return "negative_lane";
    case ValidationCode::kNegativeSpeed:
      return "negative_speed";
    case ValidationCode::kBadTimestamp:
      return "bad_timestamp";
    case ValidationCode::kBadProvenance:
      return "bad_provenance";
    case ValidationCode::kUnknownClass:
      return "unknown_class";
    case ValidationCode::kNegativeSigma:
      return "negative_sigma";
    case ValidationCode::kBadOcclusion:
      return "bad_occlusion";
    case ValidationCode::kInconsistentCoordinates:
      return "inconsistent_coordinates";
  }
  return "unknown";
}

std::vector<std::string> validate(const TrajectoryDataset & dataset)
{
  std::vector<std::string> warnings;

  static const std::regex iso8601(
    R"(^\d{4}-\d{2}-\d{2}(T\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?$)");
  if (!std::regex_match(dataset.meta.timestamp, iso8601)) {
    fail(
      ValidationCode::kBadTimestamp,
      fmt::format("meta.timestamp: '{}' is not ISO-8601", dataset.meta.timestamp));
  }
  if (dataset.meta.lat) {
    require_finite(*dataset.meta.lat, "meta.lat");
  }
  if (dataset.meta.lon) {
    require_finite(*dataset.meta.lon, "meta.lon");
  }

  std::set<std::uint64_t> ids;
  for (const Track & track : dataset.tracks) {
    const std::string where = fmt::format("track {}", track.id);
    if (!ids.insert(track.id).second) {
      fail(ValidationCode::kDuplicateTrackId, fmt::format("{}: duplicate track id", where));
    }
    require_finite(track.length, where + " length_m");
    require_finite(track.width, where + " width_m");
    if (track.length <= 0.0 || track.width <= 0.0) {
      fail(ValidationCode::kNonPositiveSize, fmt::format("{}: length and width must be > 0", where));
    }

    if (track.class_pmf) {
      double sum = 0.0;
      double best = -1.0;
      for (const auto & [cls, p] : *track.class_pmf) {
        require_finite(p, where + " class_pmf");
        if (p < 0.0 || p > 1.0) {
          fail(ValidationCode::kPmfValue, fmt::format("{}: class_pmf entries must lie in [0, 1]", where));
        }
        sum += p;
        best = std::max(best, p);
      }
      if (std::abs(sum - 1.0) > kPmfTolerance) {
        fail(ValidationCode::kPmfSum, fmt::format("{}: class_pmf sums to {}, expected 1", where, sum));
      }
      auto own = track.class_pmf->find(track.cls);
      if (own == track.class_pmf->end() || own->second < best) {
        fail(
          ValidationCode::kPmfMode,
          fmt::format("{}: class '{}' is not the mode of class_pmf", where, class_name(track.cls)));
      }
    }

    if (track.sigma) {
      for (const auto & [name, sd] : *track.sigma) {
        require_finite(sd, fmt::format("{} sigma.{}", where, name));
        if (sd < 0.0) {
          fail(ValidationCode::kNegativeSigma, fmt::format("{}: sigma.{} must be >= 0", where, name));
        }
      }
    }

    std::vector<double> gaps;
    gaps.reserve(track.samples.size());
    for (std::size_t i = 0; i < track.samples.size(); ++i) {
      const Sample & s = track.samples[i];
      const std::string at = fmt::format("{} sample {}", where, i);
      for (double value : {s.t, s.x, s.y, s.s, s.v}) {
        require_finite(value, at);
      }
      if (s.lane < 0) {
        fail(ValidationCode::kNegativeLane, fmt::format("{}: lane must be >= 0", at));
      }
      if (s.v < 0.0) {
        fail(ValidationCode::kNegativeSpeed, fmt::format("{}: speed must be >= 0", at));
      }
      if (dataset.meta.provenance == Provenance::kSimulated && std::abs(s.x - s.s) > 1e-6) {
        fail(
          ValidationCode::kInconsistentCoordinates,
          fmt::format("{}: simulated sample has x != s", at));
      }
      if (i > 0) {
        const double dt = s.t - track.samples[i - 1].t;
        if (!(dt > 0.0)) {
          fail(
            ValidationCode::kNonIncreasingTime,
            fmt::format("{}: timestamps must be strictly increasing", at));
        }
        gaps.push_back(dt);
      }
    }
    if (!gaps.empty()) {
      const double m = median(std::move(gaps));
      if (m > kSampleMaxDt) {
        fail(
          ValidationCode::kSampleRate,
          fmt::format("{}: median sample spacing {} s exceeds {} s", where, m, kSampleMaxDt));
      }
      if (m > kSampleWarnDt) {
        warnings.push_back(
          fmt::format("{}: median sample spacing {} s is above {} s", where, m, kSampleWarnDt));
      }
    }
  }

  for (std::size_t i = 0; i < dataset.occlusions.size(); ++i) {
    const OcclusionInterval & occ = dataset.occlusions[i];
    const std::string at = fmt::format("occlusion {}", i);
    for (double value : {occ.s_min, occ.s_max, occ.t_min, occ.t_max}) {
      require_finite(value, at);
    }
    if (occ.s_min > occ.s_max || occ.t_min > occ.t_max) {
      fail(ValidationCode::kBadOcclusion, fmt::format("{}: min must not exceed max", at));
    }
  }
  return warnings;
}

TrajectoryDataset parse_dataset(std::string_view text, std::vector<std::string> * warnings)
{
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error & e) {
    throw ParseError(fmt::format("$: malformed JSON: {}", e.what()));
  }
  if (!root.is_object()) {
    throw ParseError("$: expected an object");
  }

  TrajectoryDataset dataset;
  dataset.meta = parse_meta(field(root, "meta", "$"));

  const json & tracks = field(root, "tracks", "$");
  if (!tracks.is_array()) {
    throw ParseError("$.tracks: expected an array");
  }
  dataset.tracks.reserve(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    dataset.tracks.push_back(parse_track(tracks[i], fmt::format("$.tracks[{}]", i)));
  }

  if (auto it = root.find("occlusions"); it != root.end()) {
    if (!it->is_array()) {
      throw ParseError("$.occlusions: expected an array");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      dataset.occlusions.push_back(parse_occlusion((*it)[i], fmt::format("$.occlusions[{}]", i)));
    }
  }

  auto found = validate(dataset);
  if (warnings != nullptr) {
    *warnings = std::move(found);
  }
  return dataset;
}

std::string serialize_dataset(const TrajectoryDataset & dataset)
{
  json meta = {
    {"timestamp", dataset.meta.timestamp},
    {"location", dataset.meta.location},
    {"provenance", std::string(provenance_name(dataset.meta.provenance))},
    {"source_method", dataset.meta.source_method},
  };
  if (dataset.meta.lat) {
    meta["lat"] = *dataset.meta.lat;
  }
  if (dataset.meta.lon) {
    meta["lon"] = *dataset.meta.lon;
  }

  json tracks = json::array();
  for (const Track & track : dataset.tracks) {
    json samples = json::array();
    for (const Sample & s : track.samples) {
      samples.push_back(json::array({s.t, s.x, s.y, s.s, s.lane, s.v}));
    }
    json t = {
      {"id", track.id},
      {"class", std::string(class_name(track.cls))},
      {"length_m", track.length},
      {"width_m", track.width},
      {"samples", std::move(samples)},
    };
    if (track.class_pmf) {
      json pmf = json::object();
      for (const auto & [cls, p] : *track.class_pmf) {
        pmf[std::string(class_name(cls))] = p;
      }
      t["class_pmf"] = std::move(pmf);
    }
    if (track.sigma) {
      t["sigma"] = *track.sigma;
    }
    tracks.push_back(std::move(t));
  }

  json occlusions = json::array();
  for (const OcclusionInterval & occ : dataset.occlusions) {
    occlusions.push_back(
      {{"s_min", occ.s_min}, {"s_max", occ.s_max}, {"t_min", occ.t_min}, {"t_max", occ.t_max}});
  }

  json root = {{"meta", std::move(meta)}, {"tracks", std::move(tracks)}, {"occlusions", std::move(occlusions)}};
  return root.dump();
}

std::optional<double> mean_speed(const Track & track, const roadnet::Region & region)
{
  double sum = 0.0;
  std::size_t n = 0;
  for (const Sample & s : track.samples) {
    if (region.contains(s.s)) {
      sum += s.v;
      ++n;
    }
  }
  if (n < 2) {
    return std::nullopt;
  }
  return sum / static_cast<double>(n) * 3.6;
}

ObservedSpeeds observed_speeds(const TrajectoryDataset & dataset, const roadnet::Region & region)
{
  ObservedSpeeds out;
  for (const Track & track : dataset.tracks) {
    if (track.cls != VehicleClass::kCar && track.cls != VehicleClass::kTruck) {
      continue;
    }
    if (const auto v = mean_speed(track, region)) {
      (track.cls == VehicleClass::kCar ? out.car_speeds : out.truck_speeds).push_back(*v);
    }
  }
  return out;
}

roadnet::Region full_region(const TrajectoryDataset & dataset)
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Track & track : dataset.tracks) {
    for (const Sample & s : track.samples) {
      lo = std::min(lo, s.s);
      hi = std::max(hi, s.s);
    }
  }
  if (lo > hi) {
    return {0.0, 0.0};
  }
  return {lo, std::nextafter(hi, std::numeric_limits<double>::infinity())};
}

std::vector<NearMiss> tag_near_miss(const TrajectoryDataset & dataset, double ttc_threshold)
{
  if (!(ttc_threshold > 0.0)) {
    throw ConfigError(fmt::format("near-miss TTC threshold must be > 0, got {}", ttc_threshold));
  }
  std::map<std::pair<std::uint64_t, std::uint64_t>, NearMiss> worst;
  for (const auto & obs : metrics::same_lane_pairs(dataset)) {
    const auto value = metrics::ttc(obs.dx_net, obs.v_follower, obs.v_leader);
    if (!value || *value >= ttc_threshold) {
      continue;
    }
    auto [it, inserted] = worst.try_emplace(
      {obs.follower, obs.leader}, NearMiss{obs.follower, obs.leader, *value, obs.t});
    if (!inserted && *value < it->second.min_ttc) {
      it->second.min_ttc = *value;
      it->second.t_at_min = obs.t;
    }
  }
  std::vector<NearMiss> out;
  out.reserve(worst.size());
  for (const auto & [key, miss] : worst) {
    out.push_back(miss);
  }
  return out;
}

}  // namespace w99sim::trajdata
