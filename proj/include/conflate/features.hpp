#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "conflate/geometry.hpp"
#include "conflate/pair_record.hpp"

namespace conflate {

// Identifies the feature definitions below; written into every report so
// numbers from different definitions are never compared by accident.
inline constexpr const char* kFeatureDefinition =
    "v1: min_angle=pairwise-or-dominant acute segment angle (deg); "
    "min_distance=min segment distance (m, local equirectangular); "
    "max_area=max(I/A_left, I/A_right) of round buffers";

struct FeatureConfig {
  double overlap_buffer_m = 2.0;
  AngleMode angle_mode = AngleMode::pairwise;
};

void validate(const FeatureConfig& cfg);

std::string_view to_string(AngleMode mode);
AngleMode angle_mode_from_string(std::string_view name);

// Both geometries are projected to one local plane about their joint
// bounding-box centroid (planar input is only translated).
FeatureVector compute_features(const LineStringFeature& left, const LineStringFeature& right,
                               const FeatureConfig& cfg, CrsMode mode = CrsMode::geographic);

struct PairError {
  std::string pair_id;
  std::string message;
};

struct FeatureBatch {
  std::vector<PairRecord> records;  // input order, failed pairs omitted
  std::vector<PairError> errors;
};

FeatureBatch compute_features_batch(const std::vector<PairRecord>& pairs, const FeatureConfig& cfg);

// Shared-plane polylines for a pair, as used by compute_features.
std::pair<Polyline, Polyline> project_pair(const LineStringFeature& left,
                                           const LineStringFeature& right, CrsMode mode);

}  // namespace conflate
