#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "flowcast/common.hpp"

namespace flowcast::geom {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Simple polygon as an implicitly closed vertex ring (no repeated last point).
using Polygon = std::vector<Point>;

struct BBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool contains(const Point& p) const { return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y; }
};

inline BBox bbox_of(const Polygon& poly) {
  if (poly.empty()) throw DomainError("bbox of empty polygon");
  BBox b{poly[0].x, poly[0].y, poly[0].x, poly[0].y};
  for (const auto& p : poly) {
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double dist(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

// Signed area via the shoelace formula: positive for counter-clockwise rings.
inline double signed_area(const Polygon& poly) {
  double s = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

inline double polygon_area(const Polygon& poly) { return std::fabs(signed_area(poly)); }

inline Polygon ensure_ccw(Polygon poly) {
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  return poly;
}

inline bool point_on_segment(const Point& p, const Point& a, const Point& b, double eps = 1e-9) {
  double scale = std::max({std::fabs(a.x), std::fabs(a.y), std::fabs(b.x), std::fabs(b.y), 1.0});
  if (std::fabs(cross(a, b, p)) > eps * scale) return false;
  return p.x >= std::min(a.x, b.x) - eps && p.x <= std::max(a.x, b.x) + eps && p.y >= std::min(a.y, b.y) - eps &&
         p.y <= std::max(a.y, b.y) + eps;
}

// Point-in-polygon with a closed boundary: points on an edge or vertex count
// as inside. Interior test is even-odd ray casting with the usual half-open
// vertex rule so crossing counts stay consistent.
inline bool point_in_polygon(const Point& p, const Polygon& poly) {
  size_t n = poly.size();
  if (n < 3) throw DomainError("polygon needs at least 3 vertices");
  for (size_t i = 0; i < n; ++i)
    if (point_on_segment(p, poly[i], poly[(i + 1) % n])) return true;
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    bool straddles = (a.y > p.y) != (b.y > p.y);
    if (straddles) {
      double x_at = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

// Intersection of segments [p, p+r] and [q, q+s] in parameter form. Returns
// the parameters t (on the first segment) at which the segments meet; for a
// collinear overlap both overlap endpoints are reported.
inline void segment_intersection_params(const Point& p, const Point& p2, const Point& q, const Point& q2,
                                        std::vector<double>& out_t) {
  double rx = p2.x - p.x, ry = p2.y - p.y;
  double sx = q2.x - q.x, sy = q2.y - q.y;
  double denom = rx * sy - ry * sx;
  double qpx = q.x - p.x, qpy = q.y - p.y;
  double qp_cross_r = qpx * ry - qpy * rx;
  const double eps = 1e-12;
  double scale = std::max({std::fabs(rx), std::fabs(ry), std::fabs(sx), std::fabs(sy), 1.0});
  if (std::fabs(denom) <= eps * scale * scale) {
    if (std::fabs(qp_cross_r) > eps * scale * scale) return;  // parallel, non-collinear
    // Collinear: project q and q2 onto the p->p2 axis.
    double rr = rx * rx + ry * ry;
    if (rr == 0.0) return;
    double t0 = (qpx * rx + qpy * ry) / rr;
    double t1 = t0 + (sx * rx + sy * ry) / rr;
    if (t0 > t1) std::swap(t0, t1);
    double lo = std::max(0.0, t0), hi = std::min(1.0, t1);
    if (lo <= hi + eps) {
      out_t.push_back(std::clamp(lo, 0.0, 1.0));
      out_t.push_back(std::clamp(hi, 0.0, 1.0));
    }
    return;
  }
  double t = (qpx * sy - qpy * sx) / denom;
  double u = qp_cross_r / denom;
  if (t >= -eps && t <= 1 + eps && u >= -eps && u <= 1 + eps) out_t.push_back(std::clamp(t, 0.0, 1.0));
}

// Length of the part of segment [a, b] lying inside the (closed) polygon.
// Splits the segment at every polygon-edge crossing and classifies each piece
// by its midpoint.
inline double segment_length_in_polygon(const Point& a, const Point& b, const Polygon& poly) {
  size_t n = poly.size();
  if (n < 3) throw DomainError("polygon needs at least 3 vertices");
  std::vector<double> ts{0.0, 1.0};
  for (size_t i = 0; i < n; ++i) segment_intersection_params(a, b, poly[i], poly[(i + 1) % n], ts);
  std::sort(ts.begin(), ts.end());
  double total = dist(a, b);
  if (total == 0.0) return 0.0;
  double inside_len = 0.0;
  for (size_t i = 0; i + 1 < ts.size(); ++i) {
    double t0 = ts[i], t1 = ts[i + 1];
    if (t1 - t0 <= 1e-15) continue;
    double tm = 0.5 * (t0 + t1);
    Point mid{a.x + tm * (b.x - a.x), a.y + tm * (b.y - a.y)};
    if (point_in_polygon(mid, poly)) inside_len += (t1 - t0) * total;
  }
  return inside_len;
}

// Sutherland-Hodgman clipping of an arbitrary simple polygon against a CONVEX
// clip polygon. The clip ring is normalized to counter-clockwise internally.
// Output may contain degenerate zero-area bridges for non-convex subjects;
// signed area remains correct.
inline Polygon clip_by_convex(const Polygon& subject, const Polygon& convex_clip) {
  if (convex_clip.size() < 3) throw DomainError("clip polygon needs at least 3 vertices");
  Polygon clip = ensure_ccw(convex_clip);
  Polygon output = subject;
  size_t m = clip.size();
  for (size_t e = 0; e < m && !output.empty(); ++e) {
    const Point& ca = clip[e];
    const Point& cb = clip[(e + 1) % m];
    Polygon input = std::move(output);
    output.clear();
    size_t k = input.size();
    for (size_t i = 0; i < k; ++i) {
      const Point& cur = input[i];
      const Point& prev = input[(i + k - 1) % k];
      double cur_side = cross(ca, cb, cur);
      double prev_side = cross(ca, cb, prev);
      bool cur_in = cur_side >= 0;
      bool prev_in = prev_side >= 0;
      if (cur_in) {
        if (!prev_in) {
          double denom = prev_side - cur_side;
          double t = denom != 0.0 ? prev_side / denom : 0.0;
          output.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
        }
        output.push_back(cur);
      } else if (prev_in) {
        double denom = prev_side - cur_side;
        double t = denom != 0.0 ? prev_side / denom : 0.0;
        output.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
    }
  }
  return output;
}

// Ear-clipping triangulation of a simple polygon (any orientation). Returns
// triangles by vertex index into the input ring. Collinear vertices are
// removed as degenerate ears.
inline std::vector<std::array<size_t, 3>> triangulate(const Polygon& poly_in) {
  size_t n = poly_in.size();
  if (n < 3) throw DomainError("cannot triangulate polygon with fewer than 3 vertices");
  bool flipped = signed_area(poly_in) < 0;
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = flipped ? n - 1 - i : i;

  auto pt = [&](size_t ring_pos) -> const Point& { return poly_in[idx[ring_pos]]; };
  std::vector<std::array<size_t, 3>> tris;
  size_t guard = 0;
  const size_t guard_limit = n * n + 16;
  while (idx.size() > 3) {
    if (++guard > guard_limit) throw DomainError("triangulation failed: polygon may be self-intersecting");
    bool clipped = false;
    size_t k = idx.size();
    for (size_t i = 0; i < k; ++i) {
      const Point& a = pt((i + k - 1) % k);
      const Point& b = pt(i);
      const Point& c = pt((i + 1) % k);
      double cr = cross(a, b, c);
      if (cr < 0) continue;  // reflex vertex, not an ear
      if (cr == 0) {
        // Degenerate (collinear) vertex: drop it without emitting a triangle.
        idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
        clipped = true;
        break;
      }
      bool contains_other = false;
      for (size_t j = 0; j < k; ++j) {
        if (j == i || j == (i + k - 1) % k || j == (i + 1) % k) continue;
        const Point& p = pt(j);
        if (cross(a, b, p) >= 0 && cross(b, c, p) >= 0 && cross(c, a, p) >= 0) {
          contains_other = true;
          break;
        }
      }
      if (contains_other) continue;
      tris.push_back({idx[(i + k - 1) % k], idx[i], idx[(i + 1) % k]});
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
      clipped = true;
      break;
    }
    if (!clipped) throw DomainError("triangulation stalled: polygon may be self-intersecting");
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

// Area of intersection of two simple polygons: triangulate one, clip the
// other against each (convex) triangle, and sum the clipped areas.
inline double intersection_area(const Polygon& a, const Polygon& b) {
  if (a.size() < 3 || b.size() < 3) throw DomainError("polygon needs at least 3 vertices");
  BBox ba = bbox_of(a), bb = bbox_of(b);
  if (ba.max_x < bb.min_x || bb.max_x < ba.min_x || ba.max_y < bb.min_y || bb.max_y < ba.min_y) return 0.0;
  auto tris = triangulate(b);
  double total = 0.0;
  for (const auto& t : tris) {
    Polygon tri{b[t[0]], b[t[1]], b[t[2]]};
    Polygon clipped = clip_by_convex(a, tri);
    if (clipped.size() >= 3) total += std::fabs(signed_area(clipped));
  }
  return total;
}

// True when the ring has no self-intersections: non-adjacent edges never
// touch, and adjacent edges meet only at their shared vertex (no spikes).
inline bool is_simple_polygon(const Polygon& poly) {
  size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Point& a1 = poly[i];
    const Point& a2 = poly[(i + 1) % n];
    // Spike check against the following edge: collinear double-back.
    const Point& a3 = poly[(i + 2) % n];
    if (cross(a1, a2, a3) == 0.0) {
      double back = (a1.x - a2.x) * (a3.x - a2.x) + (a1.y - a2.y) * (a3.y - a2.y);
      if (back > 0) return false;  // next edge folds back over this one
    }
    for (size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the ring closure
      std::vector<double> ts;
      segment_intersection_params(a1, a2, poly[j], poly[(j + 1) % n], ts);
      if (!ts.empty()) return false;
    }
  }
  return true;
}

inline double polyline_length(const std::vector<Point>& pts) {
  double len = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) len += dist(pts[i], pts[i + 1]);
  return len;
}

// Length of the part of a polyline inside a closed polygon.
inline double polyline_length_in_polygon(const std::vector<Point>& pts, const Polygon& poly) {
  double len = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) len += segment_length_in_polygon(pts[i], pts[i + 1], poly);
  return len;
}

inline Point centroid(const Polygon& poly) {
  // Area-weighted centroid; falls back to vertex mean for zero-area rings.
  double a2 = 0.0, cx = 0.0, cy = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    double w = p.x * q.y - q.x * p.y;
    a2 += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  if (std::fabs(a2) < 1e-300) {
    double sx = 0, sy = 0;
    for (const auto& p : poly) {
      sx += p.x;
      sy += p.y;
    }
    return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
  }
  return {cx / (3.0 * a2), cy / (3.0 * a2)};
}

}  // namespace flowcast::geom
