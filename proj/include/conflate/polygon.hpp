#pragma once

#include <vector>

#include "conflate/geometry.hpp"

namespace conflate {

// Counterclockwise ring, closed implicitly (first vertex not repeated).
struct SimplePolygon {
  std::vector<PlanarPoint> ring;

  SimplePolygon() = default;

  // Validates and normalizes: drops a repeated closing vertex and
  // consecutive duplicates, reverses clockwise input.
  explicit SimplePolygon(std::vector<PlanarPoint> pts);

  double area() const;
};

// Shoelace signed area; positive for counterclockwise rings.
double signed_area(const std::vector<PlanarPoint>& ring);

inline constexpr int kBufferChordsPerQuarter = 16;

// Round-joined, round-capped buffer outline. If the buffer of a self-looping
// polyline encloses a hole, the hole is filled.
SimplePolygon buffer_polyline(const Polyline& line, double width,
                              int chords_per_quarter = kBufferChordsPerQuarter);

double polygon_intersection_area(const SimplePolygon& a, const SimplePolygon& b);

// Boundary inclusive.
bool point_in_polygon(const PlanarPoint& p, const SimplePolygon& poly);

// True iff the polyline and the closed polygon region share a point.
bool polyline_intersects_polygon(const Polyline& line, const SimplePolygon& poly);

}  // namespace conflate
