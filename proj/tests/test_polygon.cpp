#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "conflate/polygon.hpp"
#include "oracles.hpp"

using namespace conflate;

TEST_CASE("simple polygon normalizes orientation and closing vertex") {
  SimplePolygon cw({{0, 0}, {0, 1}, {1, 1}, {1, 0}, {0, 0}});
  CHECK(cw.ring.size() == 4);
  CHECK(signed_area(cw.ring) > 0);
  CHECK(cw.area() == doctest::Approx(1.0));
}

TEST_CASE("simple polygon rejects degenerate rings") {
  CHECK_THROWS_AS(SimplePolygon({{0, 0}, {1, 0}}), ValidationError);
  CHECK_THROWS_AS(SimplePolygon({{0, 0}, {1, 0}, {2, 0}}), ValidationError);
  CHECK_THROWS_AS(SimplePolygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), ValidationError);  // bow tie
  CHECK_THROWS_AS(SimplePolygon({{0, 0}, {1, 0}, {NAN, 1}}), ValidationError);
}

TEST_CASE("buffer of a segment approximates a capsule") {
  const auto poly = buffer_polyline(Polyline({{0, 0}, {10, 0}}), 2.0);
  const double capsule = 2 * 2.0 * 10 + std::numbers::pi * 4;
  CHECK(poly.area() == doctest::Approx(capsule).epsilon(0.005));
  CHECK(poly.area() <= capsule);
  CHECK(point_in_polygon({5, 1.99}, poly));
  CHECK(point_in_polygon({-1.9, 0}, poly));
  CHECK_FALSE(point_in_polygon({5, 2.1}, poly));
}

TEST_CASE("buffer of a bent polyline fills its interior") {
  // A U shape narrower than twice the buffer encloses a region that the
  // buffer must cover.
  const auto poly = buffer_polyline(Polyline({{0, 0}, {10, 0}, {10, 3}, {0, 3}}), 2.0);
  CHECK(point_in_polygon({5, 1.5}, poly));
}

TEST_CASE("intersection area of identical and disjoint polygons") {
  const auto a = buffer_polyline(Polyline({{0, 0}, {10, 0}}), 2.0);
  CHECK(polygon_intersection_area(a, a) == a.area());
  const auto far = buffer_polyline(Polyline({{0, 100}, {10, 100}}), 2.0);
  CHECK(polygon_intersection_area(a, far) == 0.0);
}

TEST_CASE("intersection area of squares") {
  SimplePolygon a({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  SimplePolygon b({{1, 1}, {3, 1}, {3, 3}, {1, 3}});
  CHECK(polygon_intersection_area(a, b) == doctest::Approx(1.0));
}

TEST_CASE("polyline against polygon") {
  SimplePolygon sq({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  CHECK(polyline_intersects_polygon(Polyline({{1, 1}, {1.5, 1.5}}), sq));   // inside
  CHECK(polyline_intersects_polygon(Polyline({{-1, 1}, {3, 1}}), sq));      // crossing
  CHECK(polyline_intersects_polygon(Polyline({{2, 3}, {2, 2}}), sq));       // touching a corner
  CHECK_FALSE(polyline_intersects_polygon(Polyline({{3, 0}, {3, 2}}), sq));
}

TEST_CASE("buffer area matches the Monte-Carlo area of the exact buffer") {
  // x-monotone polylines with wide vertex spacing never enclose a hole, so
  // the outline and the exact buffer cover the same region.
  Rng rng(44);
  for (int i = 0; i < 5; ++i) {
    std::vector<PlanarPoint> pts;
    std::vector<oracle::P> opts;
    for (int k = 0; k < 4; ++k) {
      pts.push_back({10.0 * k + rng.uniform(0, 2), rng.uniform(0, 30)});
      opts.push_back({pts.back().x(), pts.back().y()});
    }
    const double w = rng.uniform(1, 4);
    const double area = buffer_polyline(Polyline(pts), w).area();
    const auto mc = oracle::monte_carlo_buffer_overlap(opts, opts, w, 200000, 500 + i);
    CHECK(area == doctest::Approx(mc.area_a).epsilon(0.02));
  }
}

TEST_CASE("points at 0.9w are inside and points beyond w are outside") {
  Rng rng(45);
  for (int i = 0; i < 50; ++i) {
    std::vector<PlanarPoint> pts;
    std::vector<oracle::P> opts;
    for (int k = 0; k < 3; ++k) {
      pts.push_back({rng.uniform(0, 50), rng.uniform(0, 50)});
      opts.push_back({pts.back().x(), pts.back().y()});
    }
    if ((pts[1] - pts[0]).norm() < 1 || (pts[2] - pts[1]).norm() < 1) continue;
    const double w = rng.uniform(0.5, 5);
    const auto poly = buffer_polyline(Polyline(pts), w);
    for (int s = 0; s < 200; ++s) {
      const PlanarPoint q{rng.uniform(-6, 56), rng.uniform(-6, 56)};
      const double d = oracle::point_polyline_distance({q.x(), q.y()}, opts);
      if (d <= 0.9 * w) CHECK(point_in_polygon(q, poly));
      if (d > w * 1.000001) CHECK_FALSE(point_in_polygon(q, poly));
    }
  }
}
