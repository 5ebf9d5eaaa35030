#include "conflate/synth.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>

#include "conflate/error.hpp"
#include "conflate/geometry.hpp"
#include "conflate/report.hpp"
#include "conflate/rng.hpp"

namespace conflate {

using nlohmann::json;

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }
double round3(double v) { return std::round(v * 1e3) / 1e3; }

PlanarPoint draw_point(Rng& rng) {
  const double x = round6(rng.uniform());
  const double y = round6(rng.uniform());
  return {x, y};
}

json point_json(const PlanarPoint& p) { return json::array({p.x(), p.y()}); }

PlanarPoint point_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError("expected an [x, y] point, got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<PlanarPoint> points_from(const json& j, std::size_t expected = 0) {
  if (!j.is_array()) throw ValidationError("expected a point list, got " + j.dump());
  if (expected != 0 && j.size() != expected) {
    throw ValidationError("expected " + std::to_string(expected) + " points, got " + std::to_string(j.size()));
  }
  std::vector<PlanarPoint> out;
  out.reserve(j.size());
  for (const auto& p : j) out.push_back(point_from(p));
  return out;
}

json points_json(const std::vector<PlanarPoint>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back(point_json(p));
  return out;
}

double triangle_area(const PlanarPoint& a, const PlanarPoint& b, const PlanarPoint& c) {
  return std::abs(cross<double>(b - a, c - a)) / 2;
}

// Smallest distance from any vertex to the line through the other two.
double min_altitude(const PlanarPoint& a, const PlanarPoint& b, const PlanarPoint& c) {
  const double longest = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
  return 2 * triangle_area(a, b, c) / longest;
}

json draw_p2s(Rng& rng) {
  for (;;) {
    const auto p = draw_point(rng), a = draw_point(rng), b = draw_point(rng);
    if ((b - a).norm() < synth_margin::kMinSegmentLength) continue;
    return {{"point", point_json(p)}, {"segment", points_json({a, b})}};
  }
}

json draw_sc(Rng& rng, bool want_inside) {
  for (;;) {
    const auto a = draw_point(rng), b = draw_point(rng), c = draw_point(rng);
    if (triangle_area(a, b, c) < synth_margin::kMinTriangleArea) continue;
    const auto p = draw_point(rng);
    const double clearance = std::min({point_to_segment_distance(p, Segment(a, b)),
                                       point_to_segment_distance(p, Segment(b, c)),
                                       point_to_segment_distance(p, Segment(c, a))});
    if (clearance < synth_margin::kBoundaryClearance) continue;
    if (point_in_triangle(p, a, b, c) != want_inside) continue;
    return {{"point", point_json(p)}, {"triangle", points_json({a, b, c})}};
  }
}

json draw_si(Rng& rng, bool want_intersect) {
  for (;;) {
    const auto a = draw_point(rng), b = draw_point(rng), c = draw_point(rng), d = draw_point(rng);
    if ((b - a).norm() < synth_margin::kMinSegmentLength || (d - c).norm() < synth_margin::kMinSegmentLength) {
      continue;
    }
    const Segment s1(a, b), s2(c, d);
    const bool hit = segments_intersect(s1, s2);
    if (hit) {
      // A crossing counts only when no endpoint grazes the other segment.
      const double graze = std::min({point_to_segment_distance(a, s2), point_to_segment_distance(b, s2),
                                     point_to_segment_distance(c, s1), point_to_segment_distance(d, s1)});
      if (graze < synth_margin::kBoundaryClearance) continue;
    } else if (segment_distance(s1, s2) < synth_margin::kBoundaryClearance) {
      continue;
    }
    if (hit != want_intersect) continue;
    return {{"segment1", points_json({a, b})}, {"segment2", points_json({c, d})}};
  }
}

bool fits_hull_margins(const std::vector<PlanarPoint>& pts, const PlanarPoint& q) {
  for (const auto& p : pts) {
    if ((p - q).norm() < synth_margin::kMinHullSpacing) return false;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (min_altitude(pts[i], pts[j], q) < synth_margin::kCollinearTolerance) return false;
    }
  }
  return true;
}

json draw_ch(Rng& rng) {
  const auto span = static_cast<std::uint64_t>(synth_margin::kMaxHullPoints - synth_margin::kMinHullPoints + 1);
  const auto k = static_cast<std::size_t>(synth_margin::kMinHullPoints) + rng.below(span);
  std::vector<PlanarPoint> pts;
  while (pts.size() < k) {
    const auto q = draw_point(rng);
    if (fits_hull_margins(pts, q)) pts.push_back(q);
  }
  return {{"points", points_json(pts)}};
}

std::string instance_id(SynthKind kind, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04zu", std::string(to_string(kind)).c_str(), index);
  return buf;
}

enum class Verdict { correct, incorrect, malformed };

Verdict judge(const SyntheticInstance& inst, const json& answer) {
  switch (inst.kind) {
    case SynthKind::p2s:
      if (!answer.is_number()) return Verdict::malformed;
      return std::abs(answer.get<double>() - inst.truth.get<double>()) <= kDistanceTolerance ? Verdict::correct
                                                                                             : Verdict::incorrect;
    case SynthKind::sc:
    case SynthKind::si:
      if (!answer.is_boolean()) return Verdict::malformed;
      return answer.get<bool>() == inst.truth.get<bool>() ? Verdict::correct : Verdict::incorrect;
    case SynthKind::ch: {
      std::vector<PlanarPoint> given;
      try {
        given = points_from(answer);
      } catch (const ValidationError&) {
        return Verdict::malformed;
      }
      const auto truth = points_from(inst.truth);
      if (given.size() != truth.size()) return Verdict::incorrect;
      std::vector<bool> used(given.size(), false);
      for (const auto& t : truth) {
        bool matched = false;
        for (std::size_t i = 0; i < given.size() && !matched; ++i) {
          if (!used[i] && std::abs(given[i].x() - t.x()) <= kHullCoordinateTolerance &&
              std::abs(given[i].y() - t.y()) <= kHullCoordinateTolerance) {
            used[i] = matched = true;
          }
        }
        if (!matched) return Verdict::incorrect;
      }
      return Verdict::correct;
    }
  }
  return Verdict::malformed;
}

}  // namespace

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::p2s: return "p2s";
    case SynthKind::sc: return "sc";
    case SynthKind::si: return "si";
    case SynthKind::ch: return "ch";
  }
  return "?";
}

SynthKind synth_kind_from_string(std::string_view name) {
  for (auto k : all_synth_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown synthetic task '" + std::string(name) + "' (expected p2s, sc, si or ch)");
}

const std::vector<SynthKind>& all_synth_kinds() {
  static const std::vector<SynthKind> kinds{SynthKind::p2s, SynthKind::sc, SynthKind::si, SynthKind::ch};
  return kinds;
}

json compute_truth(SynthKind kind, const json& payload) {
  switch (kind) {
    case SynthKind::p2s: {
      const auto s = points_from(payload.at("segment"), 2);
      return point_to_segment_distance(point_from(payload.at("point")), Segment(s[0], s[1]));
    }
    case SynthKind::sc: {
      const auto t = points_from(payload.at("triangle"), 3);
      return point_in_triangle(point_from(payload.at("point")), t[0], t[1], t[2]);
    }
    case SynthKind::si: {
      const auto s1 = points_from(payload.at("segment1"), 2);
      const auto s2 = points_from(payload.at("segment2"), 2);
      return segments_intersect(Segment(s1[0], s1[1]), Segment(s2[0], s2[1]));
    }
    case SynthKind::ch:
      return points_json(convex_hull(points_from(payload.at("points"))));
  }
  throw ValidationError("unknown synthetic task");
}

std::vector<SyntheticInstance> generate(SynthKind kind, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SyntheticInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SyntheticInstance inst;
    inst.instance_id = instance_id(kind, i);
    inst.kind = kind;
    // Boolean tasks alternate the target answer so both classes are equally common.
    const bool target = i % 2 == 0;
    switch (kind) {
      case SynthKind::p2s: inst.payload = draw_p2s(rng); break;
      case SynthKind::sc: inst.payload = draw_sc(rng, target); break;
      case SynthKind::si: inst.payload = draw_si(rng, target); break;
      case SynthKind::ch: inst.payload = draw_ch(rng); break;
    }
    inst.truth = compute_truth(kind, inst.payload);
    out.push_back(std::move(inst));
  }
  return out;
}

json to_json(const SyntheticInstance& inst, bool include_truth) {
  json j{{"instance_id", inst.instance_id}, {"kind", to_string(inst.kind)}, {"payload", inst.payload}};
  if (include_truth) j["truth"] = inst.truth;
  return j;
}

SyntheticInstance instance_from_json(const json& j) {
  try {
    SyntheticInstance inst;
    inst.instance_id = j.at("instance_id").get<std::string>();
    inst.kind = synth_kind_from_string(j.at("kind").get<std::string>());
    inst.payload = j.at("payload");
    inst.truth = j.contains("truth") ? j.at("truth") : compute_truth(inst.kind, inst.payload);
    return inst;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed synthetic instance: ") + e.what());
  }
}

void write_instances(std::ostream& out, const std::vector<SyntheticInstance>& instances, bool include_truth) {
  for (const auto& inst : instances) out << to_json(inst, include_truth).dump() << '\n';
}

std::vector<SyntheticInstance> read_instances(std::istream& in) {
  std::vector<SyntheticInstance> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("instance line " + std::to_string(lineno) + ": " + e.what());
    }
    auto inst = instance_from_json(j);
    if (!seen.insert(inst.instance_id).second) throw ValidationError("duplicate instance id '" + inst.instance_id + "'");
    out.push_back(std::move(inst));
  }
  return out;
}

AnswerMap read_answers(std::istream& in) {
  AnswerMap out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      out[j.at("instance_id").get<std::string>()] = j.contains("answer") ? j.at("answer") : json(nullptr);
    } catch (const json::exception& e) {
      throw ParseError("answer line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

AnswerMap truths_as_answers(const std::vector<SyntheticInstance>& instances) {
  AnswerMap out;
  for (const auto& inst : instances) out[inst.instance_id] = inst.truth;
  return out;
}

bool answer_correct(const SyntheticInstance& inst, const json& answer) {
  return judge(inst, answer) == Verdict::correct;
}

GradeReport grade(const std::vector<SyntheticInstance>& instances, const AnswerMap& answers) {
  GradeReport report;
  for (const auto& inst : instances) {
    auto& score = report.per_kind[inst.kind];
    ++score.n;
    const auto it = answers.find(inst.instance_id);
    if (it == answers.end()) {
      ++score.missing;
      continue;
    }
    switch (judge(inst, it->second)) {
      case Verdict::correct: ++score.correct; break;
      case Verdict::incorrect: break;
      case Verdict::malformed:
        ++score.malformed;
        spdlog::warn("instance {}: malformed answer {}", inst.instance_id, it->second.dump());
        break;
    }
  }
  for (auto& [kind, score] : report.per_kind) {
    score.accuracy = static_cast<double>(score.correct) / static_cast<double>(score.n);
    report.n += score.n;
    report.correct += score.correct;
  }
  report.accuracy = report.n ? static_cast<double>(report.correct) / static_cast<double>(report.n) : 0.0;
  return report;
}

json to_json(const GradeReport& report) {
  json per_kind = json::object();
  for (const auto& [kind, s] : report.per_kind) {
    per_kind[std::string(to_string(kind))] = {{"n", s.n},
                                              {"correct", s.correct},
                                              {"missing", s.missing},
                                              {"malformed", s.malformed},
                                              {"accuracy", round_sig(s.accuracy)}};
  }
  return {{"n", report.n},
          {"correct", report.correct},
          {"accuracy", round_sig(report.accuracy)},
          {"per_kind", per_kind}};
}

void validate(const PlantedPairConfig& cfg) {
  if (!(cfg.positive_fraction >= 0 && cfg.positive_fraction <= 1)) {
    throw ConfigError("positive_fraction must lie in [0, 1]");
  }
  if (!(cfg.angle_margin_deg > 0 && cfg.distance_margin_m > 0 && cfg.area_margin > 0)) {
    throw ConfigError("planted label margins must be positive");
  }
  if (!(cfg.min_length_m > 0 && cfg.min_length_m <= cfg.max_length_m)) {
    throw ConfigError("planted segment lengths need 0 < min_length_m <= max_length_m");
  }
  if (!(cfg.max_angle_deg > 0 && cfg.max_angle_deg <= 90 && cfg.max_distance_m > 0)) {
    throw ConfigError("planted noise scales must be positive (max_angle_deg at most 90)");
  }
  if (!(cfg.pair_spacing_m > 2 * cfg.max_length_m + cfg.max_distance_m)) {
    throw ConfigError("pair_spacing_m is too small to keep planted pairs apart");
  }
  validate(cfg.features);
  for (const auto& t : cfg.rule.terms()) {
    const double a = t.threshold;
    bool feasible = true;
    switch (t.kind) {
      case HeuristicKind::parallel:
        feasible = a - cfg.angle_margin_deg > 0 && a + cfg.angle_margin_deg < cfg.max_angle_deg;
        break;
      case HeuristicKind::clearance:
        feasible = a - cfg.distance_margin_m > 0 && a + cfg.distance_margin_m < cfg.max_distance_m;
        break;
      case HeuristicKind::overlap:
        feasible = a - cfg.area_margin > 0 && a + cfg.area_margin < 1;
        break;
    }
    if (!feasible) {
      throw ConfigError("planted rule term " + std::string(1, kind_letter(t.kind)) +
                        " cannot be satisfied and violated with the configured margins");
    }
  }
}

namespace {

bool clear_of_thresholds(const FeatureVector& f, const PlantedPairConfig& cfg) {
  for (const auto& t : cfg.rule.terms()) {
    switch (t.kind) {
      case HeuristicKind::parallel:
        if (std::abs(f.min_angle_deg - t.threshold) < cfg.angle_margin_deg) return false;
        break;
      case HeuristicKind::clearance:
        if (std::abs(f.min_distance_m - t.threshold) < cfg.distance_margin_m) return false;
        break;
      case HeuristicKind::overlap:
        if (std::abs(f.max_area - t.threshold) < cfg.area_margin) return false;
        break;
    }
  }
  return true;
}

struct Draw {
  double angle_deg;
  double offset_m;
};

// Aims each draw at the wanted outcome; the feature check afterwards is what
// decides acceptance.
Draw aim(Rng& rng, const PlantedPairConfig& cfg, const std::set<HeuristicKind>& violate) {
  const auto& rule = cfg.rule;
  Draw d{rng.uniform(0, cfg.max_angle_deg), rng.uniform(0, cfg.max_distance_m)};
  if (rule.has(HeuristicKind::parallel)) {
    const double a = rule.threshold(HeuristicKind::parallel);
    d.angle_deg = violate.count(HeuristicKind::parallel) ? rng.uniform(a + cfg.angle_margin_deg, cfg.max_angle_deg)
                                                         : rng.uniform(0, a - cfg.angle_margin_deg);
  }
  if (rule.has(HeuristicKind::overlap)) {
    const double reach = 2 * cfg.features.overlap_buffer_m;
    d.offset_m = violate.count(HeuristicKind::overlap) ? rng.uniform(0, cfg.max_distance_m) : rng.uniform(0, reach);
  }
  if (rule.has(HeuristicKind::clearance)) {
    const double a = rule.threshold(HeuristicKind::clearance);
    d.offset_m = violate.count(HeuristicKind::clearance) ? rng.uniform(0, a)
                                                         : rng.uniform(a + cfg.distance_margin_m, cfg.max_distance_m);
  }
  return d;
}

LineStringFeature segment_feature(std::string id, const PlanarPoint& a, const PlanarPoint& b,
                                  std::map<std::string, std::string> props) {
  return {std::move(id), {{round3(a.x()), round3(a.y())}, {round3(b.x()), round3(b.y())}}, std::move(props)};
}

}  // namespace

std::vector<PairRecord> generate_planted_pairs(const PlantedPairConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);
  const std::size_t n = cfg.n;
  const auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.positive_fraction));
  std::vector<int> targets(n, 0);
  std::fill(targets.begin(), targets.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  rng.shuffle(targets);

  const auto& terms = cfg.rule.terms();
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)))));
  constexpr int kMaxAttempts = 100000;
  constexpr double kDeg = std::numbers::pi / 180;

  std::vector<PairRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PlanarPoint center{static_cast<double>(i % cols) * cfg.pair_spacing_m,
                             static_cast<double>(i / cols) * cfg.pair_spacing_m};
    char rid[32], sid[32];
    std::snprintf(rid, sizeof rid, "r%05zu", i);
    std::snprintf(sid, sizeof sid, "s%05zu", i);

    // Negatives break a random non-empty subset of the rule's terms.
    std::set<HeuristicKind> violate;
    if (targets[i] == 0) {
      const auto mask = 1 + rng.below((std::uint64_t{1} << terms.size()) - 1);
      for (std::size_t t = 0; t < terms.size(); ++t) {
        if (mask & (std::uint64_t{1} << t)) violate.insert(terms[t].kind);
      }
    }

    bool accepted = false;
    for (int attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
      const Draw draw = aim(rng, cfg, violate);
      const double phi = rng.uniform(0, std::numbers::pi);
      const double len = rng.uniform(cfg.min_length_m, cfg.max_length_m);
      const PlanarPoint u{std::cos(phi), std::sin(phi)};
      const PlanarPoint normal{-u.y(), u.x()};
      const PlanarPoint r0 = center - len / 2 * u, r1 = center + len / 2 * u;

      const double tilt = (rng.bernoulli() ? 1 : -1) * draw.angle_deg * kDeg;
      const PlanarPoint v{std::cos(phi + tilt), std::sin(phi + tilt)};
      const double len2 = len * rng.uniform(0.6, 1.0);
      const double side = rng.bernoulli() ? 1 : -1;
      const PlanarPoint c2 = center + side * draw.offset_m * normal + rng.uniform(-0.1, 0.1) * len * u;
      const PlanarPoint s0 = c2 - len2 / 2 * v, s1 = c2 + len2 / 2 * v;

      PairRecord rec;
      rec.left_geom = segment_feature(sid, s0, s1, {{"footway", "sidewalk"}});
      rec.right_geom = segment_feature(rid, r0, r1, {{"highway", "residential"}});
      const auto f = compute_features(rec.left_geom, rec.right_geom, cfg.features, CrsMode::planar);
      if (predict(f, cfg.rule) != targets[i] || !clear_of_thresholds(f, cfg)) continue;

      rec.left_id = sid;
      rec.right_id = rid;
      rec.pair_id = make_pair_id(sid, rid);
      rec.crs_mode = CrsMode::planar;
      rec.label = targets[i];
      rec.features = f;
      out.push_back(std::move(rec));
      accepted = true;
    }
    if (!accepted) {
      throw ConfigError("could not place planted pair " + std::to_string(i) + " within the configured margins");
    }
  }
  return out;
}

PlantedExport export_planted(const std::vector<PairRecord>& pairs) {
  PlantedExport ex;
  ex.roads.crs_mode = ex.sidewalks.crs_mode = CrsMode::planar;
  for (const auto& p : pairs) {
    ex.roads.features.push_back(p.right_geom);
    ex.sidewalks.features.push_back(p.left_geom);
    PairRecord label;
    label.pair_id = p.pair_id;
    label.left_id = p.left_id;
    label.right_id = p.right_id;
    label.label = p.label;
    ex.labels.push_back(std::move(label));
  }
  return ex;
}

}  // namespace conflate
