#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/geometry.hpp"

namespace conflate {

inline constexpr double kEarthRadiusM = 6371008.8;

// WGS84 longitude/latitude in degrees. In planar mode the same slots carry
// x/y in meters.
struct Coordinate {
  double lon = 0;
  double lat = 0;

  friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

enum class CrsMode { geographic, planar };

std::string_view to_string(CrsMode mode);
CrsMode crs_mode_from_string(std::string_view name);

struct LineStringFeature {
  std::string id;
  std::vector<Coordinate> coords;
  std::map<std::string, std::string> properties;
};

struct FeatureSet {
  std::vector<LineStringFeature> features;
  CrsMode crs_mode = CrsMode::geographic;
};

// Throws ValidationError if a coordinate is non-finite or, in geographic
// mode, out of range. Collapses consecutive duplicates and requires two
// distinct vertices afterwards. `name` identifies the feature in messages.
std::vector<Coordinate> validate_linestring(std::vector<Coordinate> coords, std::string_view name,
                                            CrsMode mode);

// Reads the "coordinates" of a GeoJSON LineString geometry object.
std::vector<Coordinate> linestring_from_geojson(const nlohmann::json& geometry,
                                                std::string_view name, CrsMode mode);
nlohmann::json linestring_to_geojson(const std::vector<Coordinate>& coords);

// FeatureCollection of LineString features. Point and Polygon features are
// skipped. Missing ids become "f{index}" with the feature's position in the
// collection. Non-string property values are kept as their JSON text.
FeatureSet parse_geojson(std::string_view text, CrsMode mode = CrsMode::geographic);
std::string serialize_geojson(const FeatureSet& set);

FeatureSet read_geojson_file(const std::string& path, CrsMode mode = CrsMode::geographic);

// Equirectangular projection about `origin`, in meters. Throws ExtentError
// for points more than 1 degree from the origin or an origin beyond
// 85 degrees latitude.
std::vector<PlanarPoint> project_local(std::span<const Coordinate> coords, const Coordinate& origin);
std::vector<Coordinate> unproject_local(std::span<const PlanarPoint> points, const Coordinate& origin);

double haversine_m(const Coordinate& a, const Coordinate& b);

// Center of the joint bounding box of every coordinate in `groups`.
Coordinate bbox_centroid(std::initializer_list<std::span<const Coordinate>> groups);

}  // namespace conflate
