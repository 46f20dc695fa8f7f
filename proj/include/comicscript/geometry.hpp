#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace comicscript {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

// Axis-aligned rectangle in pixel coordinates, stored as [x, y, w, h].
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w <= 0.0 || h <= 0.0 ? 0.0 : w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  Point center() const { return {x + w / 2.0, y + h / 2.0}; }

  bool contains(const Point& p) const {
    return p.x >= x && p.x <= right() && p.y >= y && p.y <= bottom();
  }
};

inline bool operator==(const Rect& a, const Rect& b) {
  return a.x == b.x && a.y == b.y && a.w == b.w && a.h == b.h;
}

inline Rect intersect(const Rect& a, const Rect& b) {
  double x0 = std::max(a.x, b.x);
  double y0 = std::max(a.y, b.y);
  double x1 = std::min(a.right(), b.right());
  double y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0.0, 0.0};
  return {x0, y0, x1 - x0, y1 - y0};
}

using Polygon = std::vector<Point>;

// Signed area via the shoelace formula; positive for counter-clockwise rings
// in a y-up frame (image coordinates flip the sign, callers take fabs).
double polygon_signed_area(const Polygon& poly);

inline double polygon_area(const Polygon& poly) { return std::fabs(polygon_signed_area(poly)); }

// Sutherland-Hodgman clip of a polygon against an axis-aligned rectangle.
// Works for convex and concave simple polygons; the result may be empty.
Polygon clip_polygon(const Polygon& poly, const Rect& clip);

// Area of polygon ∩ rect.
inline double intersection_area(const Polygon& poly, const Rect& rect) {
  return polygon_area(clip_polygon(poly, rect));
}

// Fraction of the rectangle covered by the polygon, in [0, 1].
// A zero-area rectangle yields 0.
inline double coverage_ratio(const Polygon& poly, const Rect& rect) {
  double denom = rect.area();
  if (denom <= 0.0) return 0.0;
  return intersection_area(poly, rect) / denom;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b);

// Distance from a point to the polygon boundary; 0 when on an edge.
double point_polygon_distance(const Point& p, const Polygon& poly);

bool point_in_polygon(const Point& p, const Polygon& poly);

}  // namespace comicscript
