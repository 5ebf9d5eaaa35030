#include "conflate/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>

#include <spdlog/spdlog.h>

#include "conflate/error.hpp"
#include "conflate/features.hpp"
#include "conflate/polygon.hpp"
#include "conflate/rng.hpp"

namespace conflate {

const std::set<std::string>& default_road_types() {
  static const std::set<std::string> types{"secondary", "residential", "tertiary", "primary",
                                           "living_street"};
  return types;
}

FeatureSet filter_roads(const FeatureSet& roads, const std::set<std::string>& allowed) {
  FeatureSet out;
  out.crs_mode = roads.crs_mode;
  for (const auto& f : roads.features) {
    auto it = f.properties.find("highway");
    if (it != f.properties.end() && allowed.contains(it->second)) out.features.push_back(f);
  }
  return out;
}

BBox BBox::of(const std::vector<Coordinate>& coords) {
  if (coords.empty()) throw ValidationError("bounding box of an empty linestring");
  BBox b{coords[0].lon, coords[0].lat, coords[0].lon, coords[0].lat};
  for (const auto& c : coords) {
    b.min_x = std::min(b.min_x, c.lon);
    b.max_x = std::max(b.max_x, c.lon);
    b.min_y = std::min(b.min_y, c.lat);
    b.max_y = std::max(b.max_y, c.lat);
  }
  return b;
}

SpatialIndex::SpatialIndex(std::vector<BBox> boxes) : boxes_(std::move(boxes)) {
  if (boxes_.empty()) return;
  double extent_sum = 0;
  origin_x_ = boxes_[0].min_x;
  origin_y_ = boxes_[0].min_y;
  for (const auto& b : boxes_) {
    extent_sum += std::max(b.max_x - b.min_x, b.max_y - b.min_y);
    origin_x_ = std::min(origin_x_, b.min_x);
    origin_y_ = std::min(origin_y_, b.min_y);
  }
  // Cells about the size of an average entry keep per-entry fan-out small.
  cell_ = extent_sum / static_cast<double>(boxes_.size());
  if (!(cell_ > 0)) cell_ = 1.0;

  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    const auto [x0, y0] = cell_of(boxes_[i].min_x, boxes_[i].min_y);
    const auto [x1, y1] = cell_of(boxes_[i].max_x, boxes_[i].max_y);
    for (auto x = x0; x <= x1; ++x) {
      for (auto y = y0; y <= y1; ++y) cells_[{x, y}].push_back(i);
    }
  }
}

std::pair<std::int64_t, std::int64_t> SpatialIndex::cell_of(double x, double y) const {
  return {static_cast<std::int64_t>(std::floor((x - origin_x_) / cell_)),
          static_cast<std::int64_t>(std::floor((y - origin_y_) / cell_))};
}

std::vector<std::size_t> SpatialIndex::query(const BBox& box) const {
  std::vector<std::size_t> hits;
  if (boxes_.empty()) return hits;
  auto [x0, y0] = cell_of(box.min_x, box.min_y);
  auto [x1, y1] = cell_of(box.max_x, box.max_y);
  // Clamp to occupied cells so huge query boxes stay cheap.
  const auto lo = cells_.begin()->first;
  const auto hi = cells_.rbegin()->first;
  x0 = std::max(x0, lo.first);
  x1 = std::min(x1, hi.first);
  for (auto it = cells_.lower_bound({x0, std::numeric_limits<std::int64_t>::min()});
       it != cells_.end() && it->first.first <= x1; ++it) {
    const auto [cx, cy] = it->first;
    if (cy < y0 || cy > y1) continue;
    for (std::size_t i : it->second) {
      if (boxes_[i].intersects(box)) hits.push_back(i);
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

bool join_predicate(const LineStringFeature& sidewalk, const LineStringFeature& road, double buffer_m,
                    CrsMode mode) {
  if (!(buffer_m > 0)) throw ValidationError("join buffer must be positive");
  const auto [s, r] = project_pair(sidewalk, road, mode);
  const double d = polyline_min_distance(s, r);
  // The discretized buffer lies within distance w of the road and contains
  // everything within w*cos(pi/(4k)) of it, so only the band between needs
  // the polygon test.
  if (d > buffer_m) return false;
  const double inner = buffer_m * std::cos(std::numbers::pi / (4.0 * kBufferChordsPerQuarter));
  if (d <= inner * (1 - 1e-9)) return true;
  return polyline_intersects_polygon(s, buffer_polyline(r, buffer_m));
}

bool union_predicate(const LineStringFeature& a, const LineStringFeature& b) {
  const Polyline u([&] {
    std::vector<PlanarPoint> pts;
    for (const auto& c : a.coords) pts.emplace_back(c.lon, c.lat);
    return pts;
  }());
  const Polyline v([&] {
    std::vector<PlanarPoint> pts;
    for (const auto& c : b.coords) pts.emplace_back(c.lon, c.lat);
    return pts;
  }());
  return polylines_intersect(u, v);
}

namespace {

struct ValidFeature {
  const LineStringFeature* feature;
  BBox box;
};

std::vector<ValidFeature> valid_features(const FeatureSet& set, const char* what) {
  std::vector<ValidFeature> out;
  for (const auto& f : set.features) {
    try {
      validate_linestring(f.coords, "feature '" + f.id + "'", set.crs_mode);
      out.push_back({&f, BBox::of(f.coords)});
    } catch (const ValidationError& e) {
      spdlog::warn("skipping {} {}: {}", what, f.id, e.what());
    }
  }
  return out;
}

PairRecord make_pair(const LineStringFeature& left, const LineStringFeature& right, CrsMode mode) {
  PairRecord p;
  p.pair_id = make_pair_id(left.id, right.id);
  p.left_id = left.id;
  p.right_id = right.id;
  p.left_geom = left;
  p.right_geom = right;
  p.crs_mode = mode;
  return p;
}

// Degrees of longitude/latitude covering `meters` anywhere in `box`, with slack
// for the per-pair projection origin.
std::pair<double, double> meters_to_degrees(double meters, const BBox& box) {
  constexpr double kSlack = 1.1;
  const double dlat = kSlack * meters / (kEarthRadiusM * std::numbers::pi / 180.0);
  const double max_abs_lat = std::min(89.0, std::max(std::abs(box.min_y), std::abs(box.max_y)) + 1.0 + dlat);
  const double dlon = dlat / std::cos(max_abs_lat * std::numbers::pi / 180.0);
  return {dlon, dlat};
}

}  // namespace

std::vector<PairRecord> join_candidates(const FeatureSet& roads, const FeatureSet& sidewalks, double buffer_m) {
  if (!(buffer_m > 0)) throw ValidationError("join buffer must be positive");
  if (roads.crs_mode != sidewalks.crs_mode) throw ValidationError("roads and sidewalks use different crs modes");
  const CrsMode mode = roads.crs_mode;

  const auto road_list = valid_features(roads, "road");
  const auto walk_list = valid_features(sidewalks, "sidewalk");
  std::vector<BBox> boxes;
  boxes.reserve(walk_list.size());
  for (const auto& w : walk_list) boxes.push_back(w.box);
  const SpatialIndex index(std::move(boxes));

  std::vector<PairRecord> out;
  for (const auto& road : road_list) {
    BBox query;
    if (mode == CrsMode::geographic) {
      const auto [dx, dy] = meters_to_degrees(buffer_m, road.box);
      query = road.box.expanded(dx, dy);
    } else {
      query = road.box.expanded(buffer_m * 1.001, buffer_m * 1.001);
    }
    for (std::size_t i : index.query(query)) {
      const auto& walk = *walk_list[i].feature;
      try {
        if (join_predicate(walk, *road.feature, buffer_m, mode)) out.push_back(make_pair(walk, *road.feature, mode));
      } catch (const ValidationError& e) {
        spdlog::warn("skipping pair {}|{}: {}", walk.id, road.feature->id, e.what());
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const PairRecord& x, const PairRecord& y) {
    return std::tie(x.right_id, x.left_id) < std::tie(y.right_id, y.left_id);
  });
  return out;
}

std::vector<PairRecord> union_candidates(const FeatureSet& a, const FeatureSet& b) {
  if (a.crs_mode != b.crs_mode) throw ValidationError("annotation sets use different crs modes");
  const auto a_list = valid_features(a, "annotation");
  const auto b_list = valid_features(b, "annotation");
  std::vector<BBox> boxes;
  boxes.reserve(b_list.size());
  for (const auto& f : b_list) boxes.push_back(f.box);
  const SpatialIndex index(std::move(boxes));

  std::vector<PairRecord> out;
  for (const auto& fa : a_list) {
    for (std::size_t i : index.query(fa.box)) {
      const auto& fb = *b_list[i].feature;
      if (union_predicate(*fa.feature, fb)) out.push_back(make_pair(*fa.feature, fb, a.crs_mode));
    }
  }
  std::sort(out.begin(), out.end(), [](const PairRecord& x, const PairRecord& y) {
    return std::tie(x.left_id, x.right_id) < std::tie(y.left_id, y.right_id);
  });
  return out;
}

std::size_t attach_labels(std::vector<PairRecord>& pairs,
                          const std::map<std::pair<std::string, std::string>, int>& labels) {
  std::size_t n = 0;
  for (auto& p : pairs) {
    auto it = labels.find({p.left_id, p.right_id});
    if (it == labels.end()) continue;
    if (it->second != 0 && it->second != 1) throw ValidationError("label must be 0 or 1");
    p.label = it->second;
    ++n;
  }
  return n;
}

void validate(const SplitSpec& spec) {
  if (spec.train < 0 || spec.val < 0 || spec.test < 0) throw ValidationError("split ratios must be >= 0");
  if (std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
  validate(spec);
  const double ratios[3] = {spec.train, spec.val, spec.test};
  std::array<std::size_t, 3> sizes{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    sizes[k] = static_cast<std::size_t>(std::floor(ratios[k] * static_cast<double>(n) + 1e-9));
    assigned += sizes[k];
  }
  // Floating error can overshoot by one when ratios sum to 1 + 1e-9.
  for (int k = 2; assigned > n; k = (k + 2) % 3) {
    if (sizes[k] > 0) {
      --sizes[k];
      --assigned;
    }
  }
  for (int k = 0; assigned < n; k = (k + 1) % 3) {
    ++sizes[k];
    ++assigned;
  }
  return sizes;
}

DatasetSplits split_dataset(std::vector<PairRecord> pairs, const SplitSpec& spec) {
  for (const auto& p : pairs) {
    if (!p.label) throw ValidationError("cannot split unlabeled pair '" + p.pair_id + "'");
  }
  const auto sizes = split_sizes(pairs.size(), spec);
  Rng rng(spec.seed);
  rng.shuffle(pairs);

  DatasetSplits out;
  auto first = std::make_move_iterator(pairs.begin());
  out.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes[0]));
  first += static_cast<std::ptrdiff_t>(sizes[0]);
  out.val.assign(first, first + static_cast<std::ptrdiff_t>(sizes[1]));
  first += static_cast<std::ptrdiff_t>(sizes[1]);
  out.test.assign(first, std::make_move_iterator(pairs.end()));
  return out;
}

}  // namespace conflate
