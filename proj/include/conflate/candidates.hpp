#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "conflate/geo_io.hpp"
#include "conflate/pair_record.hpp"

namespace conflate {

// Road classes that usually carry sidewalks.
const std::set<std::string>& default_road_types();

// Keeps features whose "highway" property is in `allowed`; features without
// the property are dropped.
FeatureSet filter_roads(const FeatureSet& roads, const std::set<std::string>& allowed = default_road_types());

struct BBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  static BBox of(const std::vector<Coordinate>& coords);
  BBox expanded(double dx, double dy) const { return {min_x - dx, min_y - dy, max_x + dx, max_y + dy}; }
  bool intersects(const BBox& o) const {
    return min_x <= o.max_x && o.min_x <= max_x && min_y <= o.max_y && o.min_y <= max_y;
  }
};

// Uniform-grid bounding-box index. query() returns every entry whose box
// intersects the query box, plus possibly others; results are sorted.
class SpatialIndex {
 public:
  explicit SpatialIndex(std::vector<BBox> boxes);

  std::vector<std::size_t> query(const BBox& box) const;
  std::size_t size() const { return boxes_.size(); }

 private:
  std::pair<std::int64_t, std::int64_t> cell_of(double x, double y) const;

  std::vector<BBox> boxes_;
  double origin_x_ = 0, origin_y_ = 0, cell_ = 1;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> cells_;
};

inline constexpr double kDefaultJoinBufferM = 10.0;

// Sidewalk meets the road's buffer polygon (both projected about their joint
// bounding-box centroid). Throws on degenerate geometry or extent errors.
bool join_predicate(const LineStringFeature& sidewalk, const LineStringFeature& road, double buffer_m,
                    CrsMode mode);

// The raw linestrings share at least one point.
bool union_predicate(const LineStringFeature& a, const LineStringFeature& b);

// Unlabeled (sidewalk, road) records ordered by (road id, sidewalk id).
// Features that fail validation are skipped with a warning.
std::vector<PairRecord> join_candidates(const FeatureSet& roads, const FeatureSet& sidewalks,
                                        double buffer_m = kDefaultJoinBufferM);

// Unlabeled (a, b) records ordered by (a id, b id).
std::vector<PairRecord> union_candidates(const FeatureSet& a, const FeatureSet& b);

// Copies gold labels keyed by (left_id, right_id) onto matching records.
// Returns the number of records labeled.
std::size_t attach_labels(std::vector<PairRecord>& pairs,
                          const std::map<std::pair<std::string, std::string>, int>& labels);

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
};

void validate(const SplitSpec& spec);

struct DatasetSplits {
  std::vector<PairRecord> train;
  std::vector<PairRecord> val;
  std::vector<PairRecord> test;
};

// Bucket sizes for n items: floor of each ratio, then the remainder handed out
// one at a time in train, val, test order.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec);

// Seeded shuffle followed by a contiguous partition. Requires every pair to
// be labeled.
DatasetSplits split_dataset(std::vector<PairRecord> pairs, const SplitSpec& spec);

}  // namespace conflate
