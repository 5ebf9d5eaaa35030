#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "conflate/geometry.hpp"
#include "oracles.hpp"

using namespace conflate;

namespace {

PlanarPoint pt(double x, double y) { return {x, y}; }

}  // namespace

TEST_CASE("point to segment distance") {
  CHECK(point_to_segment_distance(pt(0, 1), Segment(pt(-1, 0), pt(1, 0))) == doctest::Approx(1.0));
  CHECK(point_to_segment_distance(pt(3, 4), Segment(pt(-1, 0), pt(0, 0))) == doctest::Approx(5.0));
  CHECK(point_to_segment_distance(pt(0.5, 0), Segment(pt(0, 0), pt(1, 0))) == 0.0);
}

TEST_CASE("segment distance closest endpoints") {
  CHECK(segment_distance(Segment(pt(0, 0), pt(1, 0)), Segment(pt(3, 4), pt(3, 5))) ==
        doctest::Approx(std::sqrt(20.0)).epsilon(1e-12));
  CHECK(segment_distance(Segment(pt(0, 0), pt(2, 2)), Segment(pt(0, 2), pt(2, 0))) == 0.0);
}

TEST_CASE("degenerate segment is rejected") {
  CHECK_THROWS_AS(Segment(pt(1, 1), pt(1, 1)), ValidationError);
  CHECK_THROWS_AS(Polyline({pt(1, 1), pt(1, 1)}), ValidationError);
}

TEST_CASE("polyline drops repeated vertices") {
  Polyline line({pt(0, 0), pt(0, 0), pt(3, 4), pt(3, 4)});
  CHECK(line.points.size() == 2);
  CHECK(line.length() == doctest::Approx(5.0));
}

TEST_CASE("segment intersection is closed") {
  // shared endpoint
  CHECK(segments_intersect(Segment(pt(0, 0), pt(1, 1)), Segment(pt(1, 1), pt(2, 0))));
  // T junction
  CHECK(segments_intersect(Segment(pt(0, 0), pt(2, 0)), Segment(pt(1, 0), pt(1, 1))));
  // collinear overlap and collinear gap
  CHECK(segments_intersect(Segment(pt(0, 0), pt(2, 0)), Segment(pt(1, 0), pt(3, 0))));
  CHECK_FALSE(segments_intersect(Segment(pt(0, 0), pt(1, 0)), Segment(pt(1.5, 0), pt(3, 0))));
  // parallel
  CHECK_FALSE(segments_intersect(Segment(pt(0, 0), pt(1, 0)), Segment(pt(0, 1), pt(1, 1))));
}

TEST_CASE("point in triangle includes the boundary for either winding") {
  const auto a = pt(0, 0), b = pt(4, 0), c = pt(0, 4);
  CHECK(point_in_triangle(pt(1, 1), a, b, c));
  CHECK(point_in_triangle(pt(1, 1), a, c, b));
  CHECK(point_in_triangle(pt(2, 0), a, b, c));
  CHECK(point_in_triangle(pt(2, 2), a, b, c));
  CHECK(point_in_triangle(a, a, b, c));
  CHECK_FALSE(point_in_triangle(pt(3, 3), a, b, c));
  CHECK_THROWS_AS(point_in_triangle(pt(1, 1), a, pt(1, 0), pt(2, 0)), ValidationError);
}

TEST_CASE("convex hull order and collinear points") {
  const std::vector<PlanarPoint> pts{pt(0, 0), pt(1, 0), pt(2, 0), pt(2, 2), pt(1, 1), pt(0, 2), pt(1, 2)};
  const auto hull = convex_hull(pts);
  REQUIRE(hull.size() == 4);
  CHECK(hull[0] == pt(0, 0));
  CHECK(hull[1] == pt(2, 0));
  CHECK(hull[2] == pt(2, 2));
  CHECK(hull[3] == pt(0, 2));
}

TEST_CASE("angles between bearings") {
  CHECK(acute_angle_between(10.0, 190.0) == doctest::Approx(0.0));
  CHECK(acute_angle_between(0.0, 100.0) == doctest::Approx(80.0));
  CHECK(acute_angle_between(350.0, 10.0) == doctest::Approx(20.0));
  CHECK(segment_bearing(Segment(pt(0, 0), pt(1, 1))) == doctest::Approx(45.0));
}

TEST_CASE("polyline min angle modes") {
  const Polyline road({pt(0, 0), pt(10, 0), pt(20, 1)});
  const Polyline walk({pt(0, 5), pt(20, 5)});
  CHECK(polyline_min_angle(road, walk, AngleMode::pairwise) == doctest::Approx(0.0));
  const double dominant = polyline_min_angle(road, walk, AngleMode::dominant);
  CHECK(dominant > 0.0);
  CHECK(dominant < std::atan2(1.0, 10.0) * 180 / std::numbers::pi);
}

TEST_CASE("polyline distance and intersection") {
  const Polyline u({pt(0, 0), pt(10, 0)});
  const Polyline v({pt(0, 3), pt(10, 4)});
  CHECK(polyline_min_distance(u, v) == doctest::Approx(3.0));
  CHECK_FALSE(polylines_intersect(u, v));
  CHECK(polylines_intersect(u, Polyline({pt(5, -1), pt(5, 1)})));
}

// Property: on dyadic grid points every predicate matches the brute-force
// oracle exactly, including the many boundary cases a coarse grid produces.
TEST_CASE("predicates agree with oracles on coarse grids") {
  Rng rng(9);
  for (int i = 0; i < 3000; ++i) {
    auto g = [&] { return oracle::grid_point(rng, 4); };
    oracle::P a = g(), b = g(), c = g(), d = g();
    if ((a.x == b.x && a.y == b.y) || (c.x == d.x && c.y == d.y)) continue;
    const bool got = segments_intersect(Segment(pt(a.x, a.y), pt(b.x, b.y)), Segment(pt(c.x, c.y), pt(d.x, d.y)));
    REQUIRE(got == oracle::segments_intersect(a, b, c, d));
    if (oracle::area2(a, b, c) != 0) {
      REQUIRE(point_in_triangle(pt(d.x, d.y), pt(a.x, a.y), pt(b.x, b.y), pt(c.x, c.y)) ==
              oracle::point_in_triangle(d, a, b, c));
    }
  }
}

TEST_CASE("distance is symmetric and translation invariant") {
  Rng rng(10);
  for (int i = 0; i < 500; ++i) {
    const Segment s1(pt(rng.uniform(), rng.uniform()), pt(rng.uniform(), rng.uniform()));
    const Segment s2(pt(rng.uniform(), rng.uniform()), pt(rng.uniform(), rng.uniform()));
    const PlanarPoint shift(rng.uniform(-100, 100), rng.uniform(-100, 100));
    const double d = segment_distance(s1, s2);
    CHECK(d == doctest::Approx(segment_distance(s2, s1)).epsilon(1e-12));
    CHECK(d == doctest::Approx(segment_distance(Segment(s1.a + shift, s1.b + shift), Segment(s2.a + shift, s2.b + shift)))
                   .epsilon(1e-9));
  }
}
