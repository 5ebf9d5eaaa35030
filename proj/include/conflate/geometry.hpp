#pragma once

// Planar computational-geometry primitives. Everything here is header-only and
// templated on the scalar type; the buffer and polygon-overlap routines that
// need a polygon boolean live in polygon.hpp.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "conflate/error.hpp"

namespace conflate {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using PlanarPoint = Point2<double>;

template <typename Scalar>
inline Scalar cross(const Point2<Scalar>& u, const Point2<Scalar>& v) {
  return u.x() * v.y() - u.y() * v.x();
}

template <typename Scalar>
struct SegmentT {
  Point2<Scalar> a;
  Point2<Scalar> b;

  SegmentT(const Point2<Scalar>& a_, const Point2<Scalar>& b_) : a(a_), b(b_) {
    if (a == b) throw ValidationError("degenerate segment: endpoints coincide");
  }

  Point2<Scalar> direction() const { return b - a; }
  Scalar length() const { return (b - a).norm(); }
};

using Segment = SegmentT<double>;

template <typename Scalar>
struct PolylineT {
  std::vector<Point2<Scalar>> points;

  PolylineT() = default;

  explicit PolylineT(std::vector<Point2<Scalar>> pts) : points(std::move(pts)) {
    points.erase(std::unique(points.begin(), points.end()), points.end());
    if (points.size() < 2) {
      throw ValidationError("polyline needs at least 2 distinct vertices");
    }
  }

  std::size_t segment_count() const { return points.size() - 1; }
  SegmentT<Scalar> segment(std::size_t i) const { return {points[i], points[i + 1]}; }

  Scalar length() const {
    Scalar total = 0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) total += (points[i + 1] - points[i]).norm();
    return total;
  }
};

using Polyline = PolylineT<double>;

// Sign of cross(q - p, r - p). Magnitudes below 1e-12 * scale^2 count as
// collinear, where scale is the largest coordinate magnitude involved.
template <typename Scalar>
int orientation(const Point2<Scalar>& p, const Point2<Scalar>& q, const Point2<Scalar>& r) {
  const Scalar c = cross<Scalar>(q - p, r - p);
  Scalar scale = std::max({p.cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff(),
                           r.cwiseAbs().maxCoeff(), Scalar(1)});
  const Scalar eps = Scalar(1e-12) * scale * scale;
  if (c > eps) return 1;
  if (c < -eps) return -1;
  return 0;
}

template <typename Scalar>
Scalar point_to_segment_distance(const Point2<Scalar>& p, const SegmentT<Scalar>& s) {
  const Point2<Scalar> d = s.b - s.a;
  Scalar t = (p - s.a).dot(d) / d.squaredNorm();
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (p - (s.a + t * d)).norm();
}

namespace detail {

// q is collinear with segment s; closed bounding-box test.
template <typename Scalar>
bool on_collinear_segment(const Point2<Scalar>& q, const SegmentT<Scalar>& s) {
  return q.x() <= std::max(s.a.x(), s.b.x()) && q.x() >= std::min(s.a.x(), s.b.x()) &&
         q.y() <= std::max(s.a.y(), s.b.y()) && q.y() >= std::min(s.a.y(), s.b.y());
}

}  // namespace detail

// Closed-set test: touching endpoints and collinear overlap both count.
template <typename Scalar>
bool segments_intersect(const SegmentT<Scalar>& s1, const SegmentT<Scalar>& s2) {
  const int o1 = orientation(s1.a, s1.b, s2.a);
  const int o2 = orientation(s1.a, s1.b, s2.b);
  const int o3 = orientation(s2.a, s2.b, s1.a);
  const int o4 = orientation(s2.a, s2.b, s1.b);

  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && detail::on_collinear_segment(s2.a, s1)) return true;
  if (o2 == 0 && detail::on_collinear_segment(s2.b, s1)) return true;
  if (o3 == 0 && detail::on_collinear_segment(s1.a, s2)) return true;
  if (o4 == 0 && detail::on_collinear_segment(s1.b, s2)) return true;
  return false;
}

template <typename Scalar>
Scalar segment_distance(const SegmentT<Scalar>& s1, const SegmentT<Scalar>& s2) {
  if (segments_intersect(s1, s2)) return Scalar(0);
  return std::min({point_to_segment_distance(s1.a, s2), point_to_segment_distance(s1.b, s2),
                   point_to_segment_distance(s2.a, s1), point_to_segment_distance(s2.b, s1)});
}

// Boundary-inclusive containment in either winding.
template <typename Scalar>
bool point_in_triangle(const Point2<Scalar>& p, const Point2<Scalar>& t0, const Point2<Scalar>& t1,
                       const Point2<Scalar>& t2) {
  const Scalar area2 = cross<Scalar>(t1 - t0, t2 - t0);
  if (std::abs(area2) <= Scalar(2e-12)) throw ValidationError("degenerate triangle");
  const int winding = area2 > 0 ? 1 : -1;
  return orientation(t0, t1, p) * winding >= 0 && orientation(t1, t2, p) * winding >= 0 &&
         orientation(t2, t0, p) * winding >= 0;
}

// Andrew's monotone chain. Counterclockwise, starting at the lexicographically
// smallest point, collinear boundary points dropped. One distinct point yields
// itself; all-collinear input yields its two extremes.
template <typename Scalar>
std::vector<Point2<Scalar>> convex_hull(std::span<const Point2<Scalar>> input) {
  std::vector<Point2<Scalar>> pts(input.begin(), input.end());
  auto lex_less = [](const Point2<Scalar>& u, const Point2<Scalar>& v) {
    return u.x() < v.x() || (u.x() == v.x() && u.y() < v.y());
  };
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return pts;

  std::vector<Point2<Scalar>> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && orientation(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && orientation(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

template <typename Scalar>
std::vector<Point2<Scalar>> convex_hull(const std::vector<Point2<Scalar>>& input) {
  return convex_hull(std::span<const Point2<Scalar>>(input));
}

// Planar bearing from the +x axis, counterclockwise, in [0, 360).
template <typename Scalar>
Scalar segment_bearing(const SegmentT<Scalar>& s) {
  const Point2<Scalar> d = s.direction();
  Scalar deg = std::atan2(d.y(), d.x()) * Scalar(180) / std::numbers::pi_v<Scalar>;
  if (deg < 0) deg += Scalar(360);
  if (deg >= Scalar(360)) deg -= Scalar(360);
  return deg;
}

// Undirected acute angle between two line directions given as bearings.
template <typename Scalar>
Scalar acute_angle_between(Scalar bearing1, Scalar bearing2) {
  const Scalar d = std::fmod(std::abs(bearing1 - bearing2), Scalar(180));
  return std::min(d, Scalar(180) - d);
}

enum class AngleMode { pairwise, dominant };

// Length-weighted mean axial orientation in [0, 180), averaged on doubled angles.
template <typename Scalar>
Scalar dominant_orientation(const PolylineT<Scalar>& u) {
  Scalar sx = 0, sy = 0;
  for (std::size_t i = 0; i < u.segment_count(); ++i) {
    const auto s = u.segment(i);
    const Scalar theta = segment_bearing(s) * std::numbers::pi_v<Scalar> / Scalar(180);
    sx += s.length() * std::cos(2 * theta);
    sy += s.length() * std::sin(2 * theta);
  }
  Scalar deg = std::atan2(sy, sx) * Scalar(90) / std::numbers::pi_v<Scalar>;
  if (deg < 0) deg += Scalar(180);
  return deg;
}

template <typename Scalar>
Scalar polyline_min_angle(const PolylineT<Scalar>& u, const PolylineT<Scalar>& v,
                          AngleMode mode = AngleMode::pairwise) {
  if (mode == AngleMode::dominant) {
    return acute_angle_between(dominant_orientation(u), dominant_orientation(v));
  }
  std::vector<Scalar> vb(v.segment_count());
  for (std::size_t j = 0; j < vb.size(); ++j) vb[j] = segment_bearing(v.segment(j));
  Scalar best = Scalar(90);
  for (std::size_t i = 0; i < u.segment_count(); ++i) {
    const Scalar ub = segment_bearing(u.segment(i));
    for (Scalar b : vb) best = std::min(best, acute_angle_between(ub, b));
  }
  return best;
}

template <typename Scalar>
Scalar polyline_min_distance(const PolylineT<Scalar>& u, const PolylineT<Scalar>& v) {
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < u.segment_count(); ++i) {
    const auto su = u.segment(i);
    for (std::size_t j = 0; j < v.segment_count(); ++j) {
      best = std::min(best, segment_distance(su, v.segment(j)));
      if (best == Scalar(0)) return best;
    }
  }
  return best;
}

template <typename Scalar>
bool polylines_intersect(const PolylineT<Scalar>& u, const PolylineT<Scalar>& v) {
  for (std::size_t i = 0; i < u.segment_count(); ++i) {
    const auto su = u.segment(i);
    for (std::size_t j = 0; j < v.segment_count(); ++j) {
      if (segments_intersect(su, v.segment(j))) return true;
    }
  }
  return false;
}

}  // namespace conflate
