#include "conflate/polygon.hpp"

#define BOOST_ALLOW_DEPRECATED_HEADERS
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>

#include <algorithm>
#include <cmath>

namespace bg = boost::geometry;

namespace conflate {
namespace {

using BgPoint = bg::model::d2::point_xy<double>;
// Counterclockwise, open rings, matching SimplePolygon storage.
using BgPolygon = bg::model::polygon<BgPoint, false, false>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;
using BgLinestring = bg::model::linestring<BgPoint>;

BgPolygon to_bg(const SimplePolygon& poly) {
  BgPolygon out;
  out.outer().reserve(poly.ring.size());
  for (const auto& p : poly.ring) out.outer().emplace_back(p.x(), p.y());
  return out;
}

std::vector<PlanarPoint> from_bg_ring(const BgPolygon::ring_type& ring) {
  std::vector<PlanarPoint> pts;
  pts.reserve(ring.size());
  for (const auto& p : ring) pts.emplace_back(p.x(), p.y());
  return pts;
}

}  // namespace

double signed_area(const std::vector<PlanarPoint>& ring) {
  double twice = 0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    twice += cross<double>(ring[i], ring[(i + 1) % n]);
  }
  return twice / 2;
}

SimplePolygon::SimplePolygon(std::vector<PlanarPoint> pts) : ring(std::move(pts)) {
  ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3) throw ValidationError("polygon needs at least 3 distinct vertices");
  for (const auto& p : ring) {
    if (!p.allFinite()) throw ValidationError("polygon vertex is not finite");
  }
  const double a = signed_area(ring);
  if (a == 0) throw ValidationError("polygon has zero area");
  if (a < 0) std::reverse(ring.begin(), ring.end());

  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Segment si(ring[i], ring[(i + 1) % n]);
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_intersect(si, Segment(ring[j], ring[(j + 1) % n]))) {
        throw ValidationError("polygon ring self-intersects");
      }
    }
  }
}

double SimplePolygon::area() const { return signed_area(ring); }

SimplePolygon buffer_polyline(const Polyline& line, double width, int chords_per_quarter) {
  if (!(width > 0)) throw ValidationError("buffer width must be positive");
  if (chords_per_quarter < 1) throw ValidationError("buffer needs at least one chord per quarter");

  BgLinestring ls;
  ls.reserve(line.points.size());
  for (const auto& p : line.points) ls.emplace_back(p.x(), p.y());

  const int per_circle = 4 * chords_per_quarter;
  bg::strategy::buffer::distance_symmetric<double> distance(width);
  bg::strategy::buffer::join_round join(per_circle);
  bg::strategy::buffer::end_round end(per_circle);
  bg::strategy::buffer::point_circle circle(per_circle);
  bg::strategy::buffer::side_straight side;

  BgMultiPolygon result;
  bg::buffer(ls, result, distance, side, join, end, circle);
  if (result.empty()) throw ValidationError("buffer produced no polygon");

  // A connected polyline buffers to one polygon; numerical slivers are dropped.
  const auto largest = std::max_element(result.begin(), result.end(), [](const auto& a, const auto& b) {
    return std::abs(bg::area(a)) < std::abs(bg::area(b));
  });

  SimplePolygon out;
  out.ring = from_bg_ring(largest->outer());
  out.ring.erase(std::unique(out.ring.begin(), out.ring.end()), out.ring.end());
  if (!out.ring.empty() && out.ring.front() == out.ring.back()) out.ring.pop_back();
  if (signed_area(out.ring) < 0) std::reverse(out.ring.begin(), out.ring.end());
  return out;
}

double polygon_intersection_area(const SimplePolygon& a, const SimplePolygon& b) {
  if (a.ring == b.ring) return a.area();
  BgMultiPolygon result;
  bg::intersection(to_bg(a), to_bg(b), result);
  const double area = std::abs(bg::area(result));
  return std::min({area, a.area(), b.area()});
}

bool point_in_polygon(const PlanarPoint& p, const SimplePolygon& poly) {
  const auto& r = poly.ring;
  const std::size_t n = r.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Segment edge(r[j], r[i]);
    if (orientation(edge.a, edge.b, p) == 0 && detail::on_collinear_segment(p, edge)) return true;
    if ((r[i].y() > p.y()) != (r[j].y() > p.y())) {
      const double x_cross = r[j].x() + (p.y() - r[j].y()) * (r[i].x() - r[j].x()) / (r[i].y() - r[j].y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool polyline_intersects_polygon(const Polyline& line, const SimplePolygon& poly) {
  if (point_in_polygon(line.points.front(), poly)) return true;
  const auto& r = poly.ring;
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < line.segment_count(); ++i) {
    const auto s = line.segment(i);
    for (std::size_t k = 0; k < n; ++k) {
      if (segments_intersect(s, Segment(r[k], r[(k + 1) % n]))) return true;
    }
  }
  return false;
}

}  // namespace conflate
