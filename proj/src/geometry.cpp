#include "comicscript/geometry.hpp"

#include <limits>

namespace comicscript {

double polygon_signed_area(const Polygon& poly) {
  if (poly.size() < 3) return 0.0;
  double acc = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return acc / 2.0;
}

namespace {

enum class Side { Left, Right, Top, Bottom };

bool inside(const Point& p, Side side, const Rect& r) {
  switch (side) {
    case Side::Left:
      return p.x >= r.x;
    case Side::Right:
      return p.x <= r.right();
    case Side::Top:
      return p.y >= r.y;
    case Side::Bottom:
      return p.y <= r.bottom();
  }
  return false;
}

Point edge_intersect(const Point& a, const Point& b, Side side, const Rect& r) {
  double t = 0.0;
  switch (side) {
    case Side::Left:
      t = (r.x - a.x) / (b.x - a.x);
      return {r.x, a.y + t * (b.y - a.y)};
    case Side::Right:
      t = (r.right() - a.x) / (b.x - a.x);
      return {r.right(), a.y + t * (b.y - a.y)};
    case Side::Top:
      t = (r.y - a.y) / (b.y - a.y);
      return {a.x + t * (b.x - a.x), r.y};
    case Side::Bottom:
      t = (r.bottom() - a.y) / (b.y - a.y);
      return {a.x + t * (b.x - a.x), r.bottom()};
  }
  return a;
}

Polygon clip_side(const Polygon& poly, Side side, const Rect& r) {
  Polygon out;
  out.reserve(poly.size() + 4);
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point& cur = poly[i];
    const Point& prev = poly[(i + poly.size() - 1) % poly.size()];
    bool cur_in = inside(cur, side, r);
    bool prev_in = inside(prev, side, r);
    if (cur_in) {
      if (!prev_in) out.push_back(edge_intersect(prev, cur, side, r));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(edge_intersect(prev, cur, side, r));
    }
  }
  return out;
}

}  // namespace

Polygon clip_polygon(const Polygon& poly, const Rect& clip) {
  if (poly.size() < 3 || clip.area() <= 0.0) return {};
  Polygon cur = poly;
  for (Side side : {Side::Left, Side::Right, Side::Top, Side::Bottom}) {
    cur = clip_side(cur, side, clip);
    if (cur.size() < 3) return {};
  }
  return cur;
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  double dx = b.x - a.x;
  double dy = b.y - a.y;
  double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  double cx = a.x + t * dx;
  double cy = a.y + t * dy;
  return std::hypot(p.x - cx, p.y - cy);
}

double point_polygon_distance(const Point& p, const Polygon& poly) {
  if (poly.empty()) return std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return std::hypot(p.x - poly[0].x, p.y - poly[0].y);
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    best = std::min(best, point_segment_distance(p, a, b));
  }
  return best;
}

bool point_in_polygon(const Point& p, const Polygon& poly) {
  if (poly.size() < 3) return false;
  bool in = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) &&
        p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      in = !in;
    }
  }
  return in;
}

}  // namespace comicscript
