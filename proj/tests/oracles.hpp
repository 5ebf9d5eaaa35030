#pragma once

// Slow, independent reference implementations used only by tests. None of
// these call into the library's geometry code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "conflate/rng.hpp"

namespace oracle {

struct P {
  double x, y;
};

inline double dist(P a, P b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Minimum over points sampled along the segment at the given spacing.
inline double sampled_point_segment_distance(P p, P a, P b, double step) {
  const double len = dist(a, b);
  const auto n = static_cast<long>(std::ceil(len / step));
  double best = std::min(dist(p, a), dist(p, b));
  for (long i = 1; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    best = std::min(best, dist(p, {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}));
  }
  return best;
}

// Closed form through the foot of the perpendicular, written independently of
// the library (long double, explicit case split).
inline double analytic_point_segment_distance(P p, P a, P b) {
  const long double dx = static_cast<long double>(b.x) - a.x, dy = static_cast<long double>(b.y) - a.y;
  const long double px = static_cast<long double>(p.x) - a.x, py = static_cast<long double>(p.y) - a.y;
  const long double len2 = dx * dx + dy * dy;
  const long double t = (px * dx + py * dy) / len2;
  if (t <= 0) return static_cast<double>(std::sqrt(px * px + py * py));
  if (t >= 1) return dist(p, b);
  return static_cast<double>(std::abs(px * dy - py * dx) / std::sqrt(len2));
}

// Points on a 1/1024 grid: every product below is exact in double, so these
// predicates are exact.
inline P grid_point(conflate::Rng& rng, int cells = 1024) {
  return {static_cast<double>(rng.below(static_cast<std::uint64_t>(cells) + 1)) / cells,
          static_cast<double>(rng.below(static_cast<std::uint64_t>(cells) + 1)) / cells};
}

inline double area2(P a, P b, P c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

// Parametric solve: a + t(b - a) = c + u(d - c) with t, u in [0, 1]. Parallel
// segments intersect iff they are collinear and their projections overlap.
inline bool segments_intersect(P a, P b, P c, P d) {
  const double rx = b.x - a.x, ry = b.y - a.y, sx = d.x - c.x, sy = d.y - c.y;
  const double den = rx * sy - ry * sx;
  const double qx = c.x - a.x, qy = c.y - a.y;
  if (den != 0) {
    double tn = qx * sy - qy * sx, un = qx * ry - qy * rx, dd = den;
    if (dd < 0) tn = -tn, un = -un, dd = -dd;
    return tn >= 0 && tn <= dd && un >= 0 && un <= dd;
  }
  if (qx * ry - qy * rx != 0) return false;  // parallel, not collinear
  // Collinear: project on the dominant axis of the first segment.
  const bool use_x = std::abs(rx) >= std::abs(ry);
  auto key = [&](P p) { return use_x ? p.x : p.y; };
  const double lo1 = std::min(key(a), key(b)), hi1 = std::max(key(a), key(b));
  const double lo2 = std::min(key(c), key(d)), hi2 = std::max(key(c), key(d));
  return std::max(lo1, lo2) <= std::min(hi1, hi2);
}

// Closed triangle containment by the area-sum identity.
inline bool point_in_triangle(P p, P a, P b, P c) {
  const double whole = std::abs(area2(a, b, c));
  const double parts = std::abs(area2(p, a, b)) + std::abs(area2(p, b, c)) + std::abs(area2(p, c, a));
  return parts == whole;
}

inline bool on_closed_segment(P p, P a, P b) {
  return area2(a, b, p) == 0 && std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Vertices of the hull: points not inside the closed hull of the others. By
// Caratheodory it suffices to test every triangle and segment of the others.
inline std::vector<P> hull_vertices(const std::vector<P>& pts) {
  std::vector<P> out;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    bool covered = false;
    for (std::size_t a = 0; a < n && !covered; ++a) {
      if (a == i) continue;
      for (std::size_t b = a + 1; b < n && !covered; ++b) {
        if (b == i) continue;
        if (on_closed_segment(pts[i], pts[a], pts[b])) covered = true;
        for (std::size_t c = b + 1; c < n && !covered; ++c) {
          if (c == i || area2(pts[a], pts[b], pts[c]) == 0) continue;
          if (point_in_triangle(pts[i], pts[a], pts[b], pts[c])) covered = true;
        }
      }
    }
    if (!covered) out.push_back(pts[i]);
  }
  return out;
}

inline double point_polyline_distance(P p, const std::vector<P>& line) {
  double best = INFINITY;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, analytic_point_segment_distance(p, line[i], line[i + 1]));
  }
  return best;
}

struct AreaEstimate {
  double area_a, area_b, shared;
  double max_ratio() const { return std::max(shared / area_a, shared / area_b); }
};

// Monte-Carlo areas of the exact round buffers (points within w of a line)
// and of their intersection.
inline AreaEstimate monte_carlo_buffer_overlap(const std::vector<P>& a, const std::vector<P>& b, double w,
                                               std::size_t samples, std::uint64_t seed) {
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (const auto* line : {&a, &b}) {
    for (const auto& p : *line) {
      x0 = std::min(x0, p.x), y0 = std::min(y0, p.y), x1 = std::max(x1, p.x), y1 = std::max(y1, p.y);
    }
  }
  x0 -= w, y0 -= w, x1 += w, y1 += w;
  conflate::Rng rng(seed);
  std::size_t in_a = 0, in_b = 0, in_both = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const P q{rng.uniform(x0, x1), rng.uniform(y0, y1)};
    const bool ia = point_polyline_distance(q, a) <= w;
    const bool ib = point_polyline_distance(q, b) <= w;
    in_a += ia, in_b += ib, in_both += ia && ib;
  }
  const double box = (x1 - x0) * (y1 - y0) / static_cast<double>(samples);
  return {static_cast<double>(in_a) * box, static_cast<double>(in_b) * box, static_cast<double>(in_both) * box};
}

}  // namespace oracle
