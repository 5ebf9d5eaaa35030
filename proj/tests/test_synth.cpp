#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "conflate/synth.hpp"
#include "oracles.hpp"

using namespace conflate;
using json = nlohmann::json;

namespace {

oracle::P pt(const json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

// Area-sum containment with slack for six-decimal coordinates. Generated
// points sit at least 1e-3 from every edge, far outside this slack.
bool inside(oracle::P p, oracle::P a, oracle::P b, oracle::P c) {
  const double whole = std::abs(oracle::area2(a, b, c));
  const double parts = std::abs(oracle::area2(p, a, b)) + std::abs(oracle::area2(p, b, c)) +
                       std::abs(oracle::area2(p, c, a));
  return parts <= whole + 1e-12;
}

std::vector<oracle::P> hull_oracle(const std::vector<oracle::P>& pts) {
  std::vector<oracle::P> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool covered = false;
    for (std::size_t a = 0; a < pts.size() && !covered; ++a) {
      for (std::size_t b = a + 1; b < pts.size() && !covered; ++b) {
        for (std::size_t c = b + 1; c < pts.size() && !covered; ++c) {
          if (a == i || b == i || c == i) continue;
          covered = inside(pts[i], pts[a], pts[b], pts[c]);
        }
      }
    }
    if (!covered) out.push_back(pts[i]);
  }
  return out;
}

bool same_point_set(const json& hull, const std::vector<oracle::P>& want) {
  if (hull.size() != want.size()) return false;
  for (const auto& w : want) {
    bool found = false;
    for (const auto& h : hull) found = found || (pt(h).x == w.x && pt(h).y == w.y);
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("p2s truths match sampled and analytic distances") {
  for (const auto& inst : generate(SynthKind::p2s, 1000, 21)) {
    const auto p = pt(inst.payload["point"]);
    const auto a = pt(inst.payload["segment"][0]), b = pt(inst.payload["segment"][1]);
    const double truth = inst.truth.get<double>();
    CHECK(truth == doctest::Approx(oracle::analytic_point_segment_distance(p, a, b)).epsilon(1e-12).scale(1e-12));
    const double sampled = oracle::sampled_point_segment_distance(p, a, b, 1e-4);
    CHECK(sampled >= truth - 1e-12);
    CHECK(sampled - truth <= 1e-4);
  }
}

TEST_CASE("sc truths match area-sum containment") {
  std::size_t inside_count = 0;
  for (const auto& inst : generate(SynthKind::sc, 1000, 22)) {
    const auto& t = inst.payload["triangle"];
    const bool want = inside(pt(inst.payload["point"]), pt(t[0]), pt(t[1]), pt(t[2]));
    CHECK(inst.truth.get<bool>() == want);
    inside_count += want;
  }
  CHECK(inside_count == 500);
}

TEST_CASE("si truths match the parametric solve") {
  std::size_t hits = 0;
  for (const auto& inst : generate(SynthKind::si, 1000, 23)) {
    const auto& s1 = inst.payload["segment1"];
    const auto& s2 = inst.payload["segment2"];
    const bool want = oracle::segments_intersect(pt(s1[0]), pt(s1[1]), pt(s2[0]), pt(s2[1]));
    CHECK(inst.truth.get<bool>() == want);
    hits += want;
  }
  CHECK(hits == 500);
}

TEST_CASE("ch truths match brute-force hull vertices") {
  for (const auto& inst : generate(SynthKind::ch, 1000, 24)) {
    std::vector<oracle::P> pts;
    for (const auto& p : inst.payload["points"]) pts.push_back(pt(p));
    CHECK(pts.size() >= 5);
    CHECK(pts.size() <= 10);
    CHECK(same_point_set(inst.truth, hull_oracle(pts)));
  }
}

TEST_CASE("sc draws respect their margins") {
  for (const auto& inst : generate(SynthKind::sc, 10000, 25)) {
    const auto& t = inst.payload["triangle"];
    const auto a = pt(t[0]), b = pt(t[1]), c = pt(t[2]), p = pt(inst.payload["point"]);
    CHECK(std::abs(oracle::area2(a, b, c)) / 2 >= synth_margin::kMinTriangleArea);
    const double clearance = std::min({oracle::analytic_point_segment_distance(p, a, b),
                                       oracle::analytic_point_segment_distance(p, b, c),
                                       oracle::analytic_point_segment_distance(p, c, a)});
    CHECK(clearance >= synth_margin::kBoundaryClearance - 1e-12);
    for (const auto& q : {a, b, c, p}) {
      CHECK(q.x >= 0);
      CHECK(q.x <= 1);
      CHECK(q.y >= 0);
      CHECK(q.y <= 1);
      CHECK(std::round(q.x * 1e6) / 1e6 == q.x);
    }
  }
}

TEST_CASE("generation is a pure function of kind, n and seed") {
  const auto a = generate(SynthKind::ch, 50, 3);
  const auto b = generate(SynthKind::ch, 50, 3);
  const auto c = generate(SynthKind::ch, 50, 4);
  REQUIRE(a.size() == 50);
  CHECK(a.front().instance_id == "ch-0000");
  CHECK(a.back().instance_id == "ch-0049");
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(to_json(a[i]) == to_json(b[i]));
  CHECK(to_json(a[0]) != to_json(c[0]));
  CHECK(generate(SynthKind::p2s, 0, 1).empty());
}

TEST_CASE("instances round trip and truth is recomputed when absent") {
  const auto insts = generate(SynthKind::si, 20, 8);
  std::stringstream with, without;
  write_instances(with, insts);
  write_instances(without, insts, false);
  CHECK(without.str().find("truth") == std::string::npos);
  const auto back = read_instances(without);
  REQUIRE(back.size() == insts.size());
  for (std::size_t i = 0; i < insts.size(); ++i) CHECK(back[i].truth == insts[i].truth);
  std::stringstream dup;
  dup << to_json(insts[0]).dump() << "\n" << to_json(insts[0]).dump() << "\n";
  CHECK_THROWS_AS(read_instances(dup), ValidationError);
}

TEST_CASE("grading") {
  auto insts = generate(SynthKind::p2s, 4, 1);
  const auto chs = generate(SynthKind::ch, 2, 1);
  insts.insert(insts.end(), chs.begin(), chs.end());

  auto perfect = truths_as_answers(insts);
  const auto full = grade(insts, perfect);
  CHECK(full.accuracy == 1.0);
  CHECK(full.n == 6);

  auto answers = perfect;
  answers.erase("p2s-0000");                                             // missing
  answers["p2s-0001"] = "0.5";                                            // malformed
  answers["p2s-0002"] = insts[2].truth.get<double>() + 0.9e-3;            // within tolerance
  answers["p2s-0003"] = insts[3].truth.get<double>() + 1.1e-3;            // outside
  json hull = insts[4].truth;
  hull.erase(hull.begin());
  answers["ch-0000"] = hull;                                              // missing a vertex
  json reordered = insts[5].truth;
  std::reverse(reordered.begin(), reordered.end());
  answers["ch-0001"] = reordered;                                         // any order is fine
  const auto r = grade(insts, answers);
  const auto& p2s = r.per_kind.at(SynthKind::p2s);
  CHECK(p2s.n == 4);
  CHECK(p2s.correct == 1);
  CHECK(p2s.missing == 1);
  CHECK(p2s.malformed == 1);
  CHECK(r.per_kind.at(SynthKind::ch).correct == 1);
  CHECK(r.correct == 2);
  CHECK(r.accuracy == doctest::Approx(2.0 / 6.0));
  CHECK(to_json(r)["per_kind"]["p2s"]["missing"] == 1);
}

TEST_CASE("boolean answers must be booleans") {
  const auto insts = generate(SynthKind::sc, 2, 5);
  CHECK(answer_correct(insts[0], insts[0].truth));
  CHECK_FALSE(answer_correct(insts[0], insts[0].truth.get<bool>() ? 1 : 0));
  CHECK_FALSE(answer_correct(insts[0], "true"));
}

TEST_CASE("planted pairs follow their rule") {
  PlantedPairConfig cfg;
  cfg.n = 300;
  cfg.seed = 4;
  const auto pairs = generate_planted_pairs(cfg);
  REQUIRE(pairs.size() == 300);
  std::size_t positives = 0;
  for (const auto& p : pairs) {
    REQUIRE(p.features);
    REQUIRE(p.label);
    CHECK(predict(*p.features, cfg.rule) == *p.label);
    const bool near_p = std::abs(p.features->min_angle_deg - 5) < cfg.angle_margin_deg;
    const bool near_c = std::abs(p.features->min_distance_m - 2) < cfg.distance_margin_m;
    CHECK_FALSE(near_p);
    CHECK_FALSE(near_c);
    positives += *p.label;
  }
  CHECK(positives == 150);
  cfg.n = 0;
  CHECK(generate_planted_pairs(cfg).empty());
}

TEST_CASE("planted export and validation") {
  PlantedPairConfig cfg;
  cfg.n = 10;
  const auto ex = export_planted(generate_planted_pairs(cfg));
  CHECK(ex.roads.features.size() == 10);
  CHECK(ex.sidewalks.features.size() == 10);
  CHECK(ex.roads.features[0].properties.at("highway") == "residential");
  CHECK(ex.sidewalks.features[0].properties.at("footway") == "sidewalk");

  PlantedPairConfig bad;
  bad.positive_fraction = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = {};
  bad.distance_margin_m = 5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}
