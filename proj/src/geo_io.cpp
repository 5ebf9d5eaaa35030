#include "conflate/geo_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "conflate/error.hpp"

namespace conflate {

using nlohmann::json;

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kMaxExtentDeg = 1.0;
constexpr double kMaxOriginLatDeg = 85.0;

std::string feature_name(std::string_view id) { return "feature '" + std::string(id) + "'"; }

}  // namespace

std::string_view to_string(CrsMode mode) {
  return mode == CrsMode::planar ? "planar" : "geographic";
}

CrsMode crs_mode_from_string(std::string_view name) {
  if (name == "geographic") return CrsMode::geographic;
  if (name == "planar") return CrsMode::planar;
  throw ValidationError("unknown crs mode '" + std::string(name) + "'");
}

std::vector<Coordinate> validate_linestring(std::vector<Coordinate> coords, std::string_view name,
                                            CrsMode mode) {
  for (const auto& c : coords) {
    if (!std::isfinite(c.lon) || !std::isfinite(c.lat)) {
      throw ValidationError(std::string(name) + ": non-finite coordinate");
    }
    if (mode == CrsMode::geographic &&
        (c.lon < -180.0 || c.lon > 180.0 || c.lat < -90.0 || c.lat > 90.0)) {
      throw ValidationError(std::string(name) + ": coordinate out of lon/lat range");
    }
  }
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  if (coords.size() < 2) {
    throw ValidationError(std::string(name) + ": linestring needs at least 2 distinct vertices");
  }
  return coords;
}

std::vector<Coordinate> linestring_from_geojson(const json& geometry, std::string_view name,
                                                CrsMode mode) {
  if (!geometry.is_object() || geometry.value("type", "") != "LineString") {
    throw ValidationError(std::string(name) + ": geometry is not a LineString");
  }
  const auto it = geometry.find("coordinates");
  if (it == geometry.end() || !it->is_array()) {
    throw ValidationError(std::string(name) + ": LineString without coordinates array");
  }
  std::vector<Coordinate> coords;
  coords.reserve(it->size());
  for (const auto& pos : *it) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw ValidationError(std::string(name) + ": malformed position");
    }
    coords.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  return validate_linestring(std::move(coords), name, mode);
}

json linestring_to_geojson(const std::vector<Coordinate>& coords) {
  json positions = json::array();
  for (const auto& c : coords) positions.push_back({c.lon, c.lat});
  return {{"type", "LineString"}, {"coordinates", std::move(positions)}};
}

FeatureSet parse_geojson(std::string_view text, CrsMode mode) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw ParseError("GeoJSON document is not a FeatureCollection");
  }

  FeatureSet set;
  set.crs_mode = mode;
  std::set<std::string> seen;
  const auto& features = doc["features"];
  for (std::size_t index = 0; index < features.size(); ++index) {
    const auto& f = features[index];
    if (!f.is_object()) throw ParseError("feature " + std::to_string(index) + " is not an object");

    LineStringFeature out;
    if (auto id = f.find("id"); id != f.end() && !id->is_null()) {
      out.id = id->is_string() ? id->get<std::string>() : id->dump();
    } else {
      out.id = "f" + std::to_string(index);
    }

    const auto geom = f.find("geometry");
    if (geom == f.end() || !geom->is_object()) {
      throw ValidationError(feature_name(out.id) + ": missing geometry");
    }
    const std::string type = geom->value("type", "");
    if (type == "Point" || type == "Polygon") continue;

    out.coords = linestring_from_geojson(*geom, feature_name(out.id), mode);
    if (auto props = f.find("properties"); props != f.end() && props->is_object()) {
      for (const auto& [key, value] : props->items()) {
        if (value.is_null()) continue;
        out.properties[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    if (!seen.insert(out.id).second) {
      throw ValidationError("duplicate feature id '" + out.id + "'");
    }
    set.features.push_back(std::move(out));
  }
  return set;
}

std::string serialize_geojson(const FeatureSet& set) {
  json features = json::array();
  for (const auto& f : set.features) {
    json props = json::object();
    for (const auto& [k, v] : f.properties) props[k] = v;
    features.push_back({{"type", "Feature"},
                        {"id", f.id},
                        {"properties", std::move(props)},
                        {"geometry", linestring_to_geojson(f.coords)}});
  }
  return json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump();
}

FeatureSet read_geojson_file(const std::string& path, CrsMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_geojson(buf.str(), mode);
}

std::vector<PlanarPoint> project_local(std::span<const Coordinate> coords, const Coordinate& origin) {
  if (std::abs(origin.lat) > kMaxOriginLatDeg) {
    throw ExtentError("projection origin too close to a pole");
  }
  const double kx = kEarthRadiusM * std::cos(origin.lat * kDegToRad) * kDegToRad;
  const double ky = kEarthRadiusM * kDegToRad;
  std::vector<PlanarPoint> out;
  out.reserve(coords.size());
  for (const auto& c : coords) {
    const double dlon = c.lon - origin.lon;
    const double dlat = c.lat - origin.lat;
    if (std::abs(dlon) > kMaxExtentDeg || std::abs(dlat) > kMaxExtentDeg) {
      throw ExtentError("coordinate lies more than 1 degree from the projection origin");
    }
    out.emplace_back(kx * dlon, ky * dlat);
  }
  return out;
}

std::vector<Coordinate> unproject_local(std::span<const PlanarPoint> points, const Coordinate& origin) {
  const double kx = kEarthRadiusM * std::cos(origin.lat * kDegToRad) * kDegToRad;
  const double ky = kEarthRadiusM * kDegToRad;
  std::vector<Coordinate> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({origin.lon + p.x() / kx, origin.lat + p.y() / ky});
  return out;
}

double haversine_m(const Coordinate& a, const Coordinate& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s = std::sin(dphi / 2);
  const double t = std::sin(dlambda / 2);
  const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

Coordinate bbox_centroid(std::initializer_list<std::span<const Coordinate>> groups) {
  double min_lon = std::numeric_limits<double>::infinity(), max_lon = -min_lon;
  double min_lat = min_lon, max_lat = -min_lon;
  for (const auto& g : groups) {
    for (const auto& c : g) {
      min_lon = std::min(min_lon, c.lon);
      max_lon = std::max(max_lon, c.lon);
      min_lat = std::min(min_lat, c.lat);
      max_lat = std::max(max_lat, c.lat);
    }
  }
  if (!std::isfinite(min_lon)) throw ValidationError("bounding box of an empty coordinate set");
  return {(min_lon + max_lon) / 2, (min_lat + max_lat) / 2};
}

}  // namespace conflate
