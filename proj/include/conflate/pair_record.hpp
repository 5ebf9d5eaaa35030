#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/geo_io.hpp"

namespace conflate {

struct FeatureVector {
  double min_angle_deg = 0;   // [0, 90]
  double min_distance_m = 0;  // >= 0
  double max_area = 0;        // [0, 1]

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// One candidate pair. For the join task left is the sidewalk and right the
// road; for the union task left comes from the first annotation set.
struct PairRecord {
  std::string pair_id;
  std::string left_id;
  std::string right_id;
  LineStringFeature left_geom;
  LineStringFeature right_geom;
  CrsMode crs_mode = CrsMode::geographic;
  std::optional<int> label;
  std::optional<FeatureVector> features;
};

std::string make_pair_id(const std::string& left_id, const std::string& right_id);

// One JSON object per line:
//   {pair_id, left_id, right_id, crs?, left_geom, right_geom, label?, features?}
// Geometries are GeoJSON LineString objects; "crs" is written only for planar
// records; features are {min_angle, min_distance, max_area}.
nlohmann::json pair_to_json(const PairRecord& pair);
PairRecord pair_from_json(const nlohmann::json& j);

void write_pairs(std::ostream& out, const std::vector<PairRecord>& pairs);
std::vector<PairRecord> read_pairs(std::istream& in);

void write_pairs_file(const std::string& path, const std::vector<PairRecord>& pairs);
std::vector<PairRecord> read_pairs_file(const std::string& path);

// Throws ValidationError on duplicate pair ids or labels outside {0, 1}.
void validate_pairs(const std::vector<PairRecord>& pairs);

}  // namespace conflate
