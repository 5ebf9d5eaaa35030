#include "conflate/features.hpp"

#include <algorithm>
#include <cmath>

#include "conflate/error.hpp"
#include "conflate/polygon.hpp"

namespace conflate {

std::string_view to_string(AngleMode mode) { return mode == AngleMode::dominant ? "dominant" : "pairwise"; }

AngleMode angle_mode_from_string(std::string_view name) {
  if (name == "pairwise") return AngleMode::pairwise;
  if (name == "dominant") return AngleMode::dominant;
  throw ValidationError("unknown angle mode '" + std::string(name) + "' (expected pairwise or dominant)");
}

void validate(const FeatureConfig& cfg) {
  if (!(cfg.overlap_buffer_m > 0) || !std::isfinite(cfg.overlap_buffer_m)) {
    throw ValidationError("overlap_buffer_m must be positive");
  }
}

std::pair<Polyline, Polyline> project_pair(const LineStringFeature& left,
                                           const LineStringFeature& right, CrsMode mode) {
  const auto lc = validate_linestring(left.coords, "feature '" + left.id + "'", mode);
  const auto rc = validate_linestring(right.coords, "feature '" + right.id + "'", mode);
  const Coordinate origin = bbox_centroid({lc, rc});

  auto to_plane = [&](const std::vector<Coordinate>& coords) {
    if (mode == CrsMode::geographic) return project_local(coords, origin);
    std::vector<PlanarPoint> pts;
    pts.reserve(coords.size());
    for (const auto& c : coords) pts.emplace_back(c.lon - origin.lon, c.lat - origin.lat);
    return pts;
  };
  return {Polyline(to_plane(lc)), Polyline(to_plane(rc))};
}

FeatureVector compute_features(const LineStringFeature& left, const LineStringFeature& right,
                               const FeatureConfig& cfg, CrsMode mode) {
  validate(cfg);
  const auto [u, v] = project_pair(left, right, mode);

  FeatureVector f;
  f.min_angle_deg = polyline_min_angle(u, v, cfg.angle_mode);
  f.min_distance_m = polyline_min_distance(u, v);

  // Buffers cannot meet once the lines are further apart than both widths.
  if (f.min_distance_m > 2 * cfg.overlap_buffer_m) {
    f.max_area = 0.0;
    return f;
  }
  const SimplePolygon bu = buffer_polyline(u, cfg.overlap_buffer_m);
  const SimplePolygon bv = buffer_polyline(v, cfg.overlap_buffer_m);
  const double shared = polygon_intersection_area(bu, bv);
  f.max_area = std::clamp(std::max(shared / bu.area(), shared / bv.area()), 0.0, 1.0);
  return f;
}

FeatureBatch compute_features_batch(const std::vector<PairRecord>& pairs, const FeatureConfig& cfg) {
  validate(cfg);
  FeatureBatch batch;
  batch.records.reserve(pairs.size());
  for (const auto& pair : pairs) {
    try {
      PairRecord out = pair;
      out.features = compute_features(pair.left_geom, pair.right_geom, cfg, pair.crs_mode);
      batch.records.push_back(std::move(out));
    } catch (const ValidationError& e) {
      batch.errors.push_back({pair.pair_id, e.what()});
    }
  }
  return batch;
}

}  // namespace conflate
