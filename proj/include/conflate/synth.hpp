#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "conflate/features.hpp"
#include "conflate/geo_io.hpp"
#include "conflate/heuristics.hpp"
#include "conflate/pair_record.hpp"

namespace conflate {

// Unit-square reasoning tasks: point-to-segment distance, point in triangle,
// segment intersection, and convex hull.
enum class SynthKind { p2s, sc, si, ch };

std::string_view to_string(SynthKind kind);
SynthKind synth_kind_from_string(std::string_view name);
const std::vector<SynthKind>& all_synth_kinds();

// Payload layouts, all coordinates as [x, y] in [0,1]^2:
//   p2s  {"point": P, "segment": [A, B]}            truth: number
//   sc   {"point": P, "triangle": [A, B, C]}        truth: boolean
//   si   {"segment1": [A, B], "segment2": [C, D]}   truth: boolean
//   ch   {"points": [P...]}                         truth: hull vertices [P...]
struct SyntheticInstance {
  std::string instance_id;
  SynthKind kind = SynthKind::p2s;
  nlohmann::json payload;
  nlohmann::json truth;
};

namespace synth_margin {
inline constexpr double kMinTriangleArea = 0.01;
inline constexpr double kMinSegmentLength = 0.05;
inline constexpr double kMinHullSpacing = 0.02;
inline constexpr double kCollinearTolerance = 1e-3;
inline constexpr double kBoundaryClearance = 1e-3;  // sc point to edge, si touching/near miss
inline constexpr int kMinHullPoints = 5;
inline constexpr int kMaxHullPoints = 10;
}  // namespace synth_margin

// Pure function of (kind, n, seed). Draws that fall inside a degeneracy margin
// are resampled. Coordinates are rounded to 6 decimals before truths are
// computed, so the stored payload is exactly what was graded against.
std::vector<SyntheticInstance> generate(SynthKind kind, std::size_t n, std::uint64_t seed);

// Truth recomputed from a payload with the geometry primitives.
nlohmann::json compute_truth(SynthKind kind, const nlohmann::json& payload);

nlohmann::json to_json(const SyntheticInstance& inst, bool include_truth = true);
SyntheticInstance instance_from_json(const nlohmann::json& j);

void write_instances(std::ostream& out, const std::vector<SyntheticInstance>& instances, bool include_truth = true);
std::vector<SyntheticInstance> read_instances(std::istream& in);

using AnswerMap = std::map<std::string, nlohmann::json>;

// Lines of {instance_id, answer}.
AnswerMap read_answers(std::istream& in);
AnswerMap truths_as_answers(const std::vector<SyntheticInstance>& instances);

inline constexpr double kDistanceTolerance = 1e-3;
inline constexpr double kHullCoordinateTolerance = 1e-9;

bool answer_correct(const SyntheticInstance& inst, const nlohmann::json& answer);

struct KindScore {
  std::size_t n = 0;
  std::size_t correct = 0;
  std::size_t missing = 0;
  std::size_t malformed = 0;
  double accuracy = 0;
};

struct GradeReport {
  std::map<SynthKind, KindScore> per_kind;
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0;
};

// Missing and malformed answers count as incorrect; malformed ones are logged.
GradeReport grade(const std::vector<SyntheticInstance>& instances, const AnswerMap& answers);

nlohmann::json to_json(const GradeReport& report);

// Labeled planar join pairs whose labels follow `rule` exactly. Every feature
// named by the rule sits at least its margin away from the threshold, so the
// rule is recoverable by a sweep.
struct PlantedPairConfig {
  std::size_t n = 2000;
  HeuristicSpec rule = HeuristicSpec::parse("p(5)&c(2)");
  std::uint64_t seed = 1;
  double positive_fraction = 0.5;
  double angle_margin_deg = 0.5;
  double distance_margin_m = 0.25;
  double area_margin = 0.02;
  double max_angle_deg = 30;     // angle noise scale
  double max_distance_m = 8;     // offset noise scale
  double min_length_m = 20;
  double max_length_m = 60;
  double pair_spacing_m = 1000;  // pairs sit on a grid this far apart
  FeatureConfig features;
};

void validate(const PlantedPairConfig& cfg);

std::vector<PairRecord> generate_planted_pairs(const PlantedPairConfig& cfg);

// The same pairs as separate road and sidewalk layers plus a gold label list,
// ready for the candidates stage.
struct PlantedExport {
  FeatureSet roads;
  FeatureSet sidewalks;
  std::vector<PairRecord> labels;  // left/right ids and label only matter
};

PlantedExport export_planted(const std::vector<PairRecord>& pairs);

}  // namespace conflate
