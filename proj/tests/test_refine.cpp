#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "conflate/refine.hpp"

using namespace conflate;
using json = nlohmann::json;

namespace {

std::vector<PairRecord> pairs(std::size_t n) {
  std::vector<PairRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = out[i];
    p.pair_id = "p" + std::to_string(i);
    p.left_geom = {"l", {{0, 0}, {10, 0}}, {}};
    p.right_geom = {"r", {{0, 1}, {10, 1}}, {}};
    p.crs_mode = CrsMode::planar;
    p.label = static_cast<int>(i % 2);
    p.features = FeatureVector{i % 2 ? 1.0 : 40.0, 1.0, 0.5};
  }
  return out;
}

const PromptTemplates& templates() {
  static const auto t = PromptTemplates::load(PromptTemplates::default_dir());
  return t;
}

}  // namespace

TEST_CASE("two passes per pair, review first") {
  const auto ps = pairs(6);
  json script;
  for (const auto& p : ps) script[p.pair_id] = {{"review", "check " + p.pair_id}, {"refine", std::to_string(*p.label)}};
  MockBackend scripted(script);
  const std::vector<int> initial(ps.size(), 1);
  const auto result = run_refine(ps, initial, {}, templates(), nullptr, GenerationParams::review(), scripted);

  REQUIRE(result.records.size() == 6);
  const auto calls = scripted.calls();
  CHECK(calls.size() == 12);
  for (const auto& p : ps) {
    std::vector<std::string> passes;
    for (const auto& c : calls) {
      if (c.pair_id == p.pair_id) passes.push_back(c.pass);
    }
    CHECK(passes == std::vector<std::string>{"review", "refine"});
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& r = result.records[i];
    CHECK(r.pair_id == ps[i].pair_id);
    CHECK(r.review == "check " + ps[i].pair_id);
    CHECK(r.final_label == ps[i].label);
  }
  REQUIRE(result.eval);
  CHECK(result.eval->eval.accuracy == 1.0);
  REQUIRE(result.initial_eval);
  CHECK(result.initial_eval->accuracy == doctest::Approx(0.5));
}

TEST_CASE("refine prompt carries the initial answer and the review") {
  const auto ps = pairs(1);
  MockBackend mock(json{{"p0", {{"review", "the gap is small"}, {"refine", "1"}}}});
  const auto rec = review_and_refine(ps[0], 0, {}, templates(), nullptr, GenerationParams::review(), mock);
  REQUIRE(rec.refine_exchange);
  const auto& review_user = rec.review_exchange.request.back().content;
  const auto& refine_user = rec.refine_exchange->request.back().content;
  CHECK(review_user.find("A previous attempt answered: 0") != std::string::npos);
  CHECK(refine_user.find("the gap is small") != std::string::npos);
  CHECK(rec.review_exchange.request.front().role == Role::system);
  CHECK(rec.final_label == 1);
  CHECK(to_json(rec)["parse_failure"] == false);
}

TEST_CASE("a failed review skips the refine pass") {
  const auto ps = pairs(1);
  MockBackend mock(json{{"p0", {{"refine", "1"}}}});
  const auto rec = review_and_refine(ps[0], 1, {}, templates(), nullptr, GenerationParams::review(), mock);
  CHECK_FALSE(rec.refine_exchange.has_value());
  CHECK_FALSE(rec.final_label.has_value());
  CHECK_FALSE(rec.error.empty());
  CHECK(mock.calls().size() == 1);
}

TEST_CASE("unparseable final answers") {
  const auto ps = pairs(2);
  MockBackend mock(json{{"*", "no idea"}});
  const auto inc = run_refine(ps, {0, 0}, {}, templates(), nullptr, GenerationParams::review(), mock);
  CHECK(inc.eval->parse_failures == 2);
  CHECK(inc.eval->eval.accuracy == 0.0);
}

TEST_CASE("initial answers") {
  const auto ps = pairs(200);
  const auto a = make_initial(ps, InitialSource::random(9));
  CHECK(a == make_initial(ps, InitialSource::random(9)));
  CHECK(a != make_initial(ps, InitialSource::random(10)));
  const auto ones = std::count(a.begin(), a.end(), 1);
  CHECK(ones > 60);
  CHECK(ones < 140);
  const auto h = make_initial(ps, InitialSource::heuristic(HeuristicSpec::parse("p(5)")));
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(h[i] == *ps[i].label);
  auto bare = ps;
  bare[3].features.reset();
  CHECK_THROWS_AS(make_initial(bare, InitialSource::heuristic(HeuristicSpec::parse("p(5)"))), ValidationError);
}

TEST_CASE("input validation") {
  const auto ps = pairs(2);
  MockBackend mock(json{{"*", "1"}});
  CHECK_THROWS_AS(run_refine(ps, {1}, {}, templates(), nullptr, GenerationParams::review(), mock), ValidationError);
  CHECK_THROWS_AS(run_refine({}, {}, {}, templates(), nullptr, GenerationParams::review(), mock), ValidationError);
  CHECK_THROWS_AS(review_and_refine(ps[0], 2, {}, templates(), nullptr, GenerationParams::review(), mock),
                  ValidationError);
  CHECK(mock.calls().empty());
}
