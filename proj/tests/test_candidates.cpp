#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "conflate/candidates.hpp"
#include "conflate/features.hpp"
#include "conflate/polygon.hpp"
#include "support.hpp"

using namespace conflate;

TEST_CASE("road filter keeps the default classes") {
  FeatureSet roads;
  roads.features = {{"a", {{0, 0}, {1, 1}}, {{"highway", "residential"}}},
                    {"b", {{0, 0}, {1, 2}}, {{"highway", "motorway"}}},
                    {"c", {{0, 0}, {1, 3}}, {}},
                    {"d", {{0, 0}, {1, 4}}, {{"highway", "living_street"}}}};
  const auto kept = filter_roads(roads);
  REQUIRE(kept.features.size() == 2);
  CHECK(kept.features[0].id == "a");
  CHECK(kept.features[1].id == "d");
}

TEST_CASE("spatial index matches a linear scan") {
  Rng rng(5);
  std::vector<BBox> boxes;
  for (int i = 0; i < 300; ++i) {
    const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
    boxes.push_back({x, y, x + rng.uniform(0, 8), y + rng.uniform(0, 8)});
  }
  const SpatialIndex index(boxes);
  for (int q = 0; q < 200; ++q) {
    const double x = rng.uniform(-10, 110), y = rng.uniform(-10, 110);
    const BBox query{x, y, x + rng.uniform(0, 30), y + rng.uniform(0, 30)};
    std::vector<std::size_t> want;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (boxes[i].intersects(query)) want.push_back(i);
    }
    CHECK(index.query(query) == want);
  }
}

TEST_CASE("join predicate against exact distances") {
  // Inside the inscribed band the answer is certain; beyond w it is false.
  const double w = 10;
  const double inner = w * std::cos(std::numbers::pi / (4.0 * kBufferChordsPerQuarter));
  const LineStringFeature road{"r", {{0, 0}, {100, 0}}, {}};
  for (double d : {0.0, 5.0, inner - 0.01}) {
    CHECK(join_predicate({"s", {{20, d}, {60, d}}, {}}, road, w, CrsMode::planar));
  }
  for (double d : {w + 1e-6, 10.5, 30.0}) {
    CHECK_FALSE(join_predicate({"s", {{20, d}, {60, d}}, {}}, road, w, CrsMode::planar));
  }
}

TEST_CASE("join candidates equal all-pairs evaluation on a geographic fixture") {
  const auto fx = testing::candidate_fixture(11);
  const auto pairs = join_candidates(fx.roads, fx.sidewalks, 10.0);
  std::set<std::pair<std::string, std::string>> got, want;
  for (const auto& p : pairs) got.insert({p.left_id, p.right_id});
  for (const auto& r : fx.roads.features) {
    for (const auto& s : fx.sidewalks.features) {
      if (join_predicate(s, r, 10.0, CrsMode::geographic)) want.insert({s.id, r.id});
    }
  }
  CHECK(got == want);
  CHECK(!want.empty());
  // sorted by road, then sidewalk
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    CHECK(std::tie(pairs[i - 1].right_id, pairs[i - 1].left_id) < std::tie(pairs[i].right_id, pairs[i].left_id));
  }
}

TEST_CASE("union candidates") {
  FeatureSet a, b;
  a.features = {{"a1", {{0, 0}, {10, 0}}, {}}, {"a2", {{0, 5}, {10, 5}}, {}}};
  b.features = {{"b1", {{5, -1}, {5, 1}}, {}}, {"b2", {{10, 0}, {10, 5}}, {}}, {"b3", {{20, 20}, {21, 21}}, {}}};
  const auto pairs = union_candidates(a, b);
  std::vector<std::string> ids;
  for (const auto& p : pairs) ids.push_back(p.pair_id);
  CHECK(ids == std::vector<std::string>{"a1|b1", "a1|b2", "a2|b2"});
}

TEST_CASE("degenerate features are skipped") {
  FeatureSet roads, walks;
  roads.crs_mode = walks.crs_mode = CrsMode::planar;
  roads.features = {{"r", {{0, 0}, {10, 0}}, {}}};
  walks.features = {{"bad", {{1, 1}, {1, 1}}, {}}, {"ok", {{1, 2}, {9, 2}}, {}}};
  const auto pairs = join_candidates(roads, walks, 10);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].left_id == "ok");
}

TEST_CASE("labels attach by id pair") {
  std::vector<PairRecord> pairs(2);
  pairs[0].left_id = "s1", pairs[0].right_id = "r1";
  pairs[1].left_id = "s2", pairs[1].right_id = "r1";
  CHECK(attach_labels(pairs, {{{"s1", "r1"}, 1}, {{"s9", "r9"}, 0}}) == 1);
  CHECK(pairs[0].label == 1);
  CHECK_FALSE(pairs[1].label.has_value());
}

TEST_CASE("split sizes") {
  using A = std::array<std::size_t, 3>;
  CHECK(split_sizes(10, {}) == A{8, 1, 1});
  CHECK(split_sizes(11, {}) == A{9, 1, 1});
  CHECK(split_sizes(0, {}) == A{0, 0, 0});
  CHECK(split_sizes(7, {0.5, 0.25, 0.25, 0}) == A{4, 2, 1});
  CHECK_THROWS_AS(split_sizes(5, {0.5, 0.5, 0.5, 0}), ValidationError);
  for (std::size_t n = 0; n < 200; ++n) {
    const auto s = split_sizes(n, {});
    CHECK(s[0] + s[1] + s[2] == n);
  }
}

TEST_CASE("split is a seeded partition") {
  std::vector<PairRecord> pairs(50);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].pair_id = "p" + std::to_string(i);
    pairs[i].label = static_cast<int>(i % 2);
  }
  const auto a = split_dataset(pairs, {0.8, 0.1, 0.1, 3});
  const auto b = split_dataset(pairs, {0.8, 0.1, 0.1, 3});
  const auto c = split_dataset(pairs, {0.8, 0.1, 0.1, 4});
  auto ids = [](const std::vector<PairRecord>& v) {
    std::vector<std::string> out;
    for (const auto& p : v) out.push_back(p.pair_id);
    return out;
  };
  CHECK(ids(a.train) == ids(b.train));
  CHECK(ids(a.train) != ids(c.train));
  std::set<std::string> all;
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    for (const auto& p : *part) all.insert(p.pair_id);
  }
  CHECK(all.size() == 50);
  pairs[3].label.reset();
  CHECK_THROWS_AS(split_dataset(pairs, {}), ValidationError);
}
