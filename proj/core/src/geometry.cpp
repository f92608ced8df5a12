#include "ember/geometry.hpp"

#include <algorithm>
#include <limits>

namespace ember::geom {
namespace {

void bbox_extend(const MultiPolygon& mp, double& lo_x, double& lo_y, double& hi_x, double& hi_y) {
  for (const auto& poly : mp) {
    for (const auto& v : poly.outer) {
      lo_x = std::min(lo_x, v.x);
      lo_y = std::min(lo_y, v.y);
      hi_x = std::max(hi_x, v.x);
      hi_y = std::max(hi_y, v.y);
    }
  }
}

template <class Fn>
void for_each_edge(const MultiPolygon& mp, Fn&& fn) {
  auto ring_edges = [&](const Ring& r) {
    const std::size_t n = r.size();
    for (std::size_t i = 0; i < n; ++i) fn(r[i], r[(i + 1) % n]);
  };
  for (const auto& poly : mp) {
    ring_edges(poly.outer);
    for (const auto& h : poly.holes) ring_edges(h);
  }
}

// Parameters along p->q where it meets the edges of `other`.
void split_params(Vec2 p, Vec2 q, const MultiPolygon& other, double tol, std::vector<double>& ts) {
  const Vec2 r = q - p;
  const double rr = dot(r, r);
  if (rr == 0) return;
  const double rlen = std::sqrt(rr);
  for_each_edge(other, [&](Vec2 s, Vec2 s2) {
    const Vec2 d = s2 - s;
    const double denom = cross(r, d);
    const Vec2 sp = s - p;
    const double dlen = norm(d);
    if (std::abs(denom) > 1e-14 * rlen * dlen) {
      const double t = cross(sp, d) / denom;
      const double u = cross(sp, r) / denom;
      const double slack_u = dlen > 0 ? tol / dlen : 0;
      if (u >= -slack_u && u <= 1 + slack_u && t > 0 && t < 1) ts.push_back(t);
    } else if (std::abs(cross(sp, r)) <= tol * rlen) {
      for (Vec2 e : {s, s2}) {
        const double t = dot(e - p, r) / rr;
        if (t > 0 && t < 1) ts.push_back(t);
      }
    }
  });
}

}  // namespace

double signed_area(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0;
  // Shift to the first vertex to limit cancellation far from the origin.
  const Vec2 o = ring[0];
  double s = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) s += cross(ring[i] - o, ring[i + 1] - o);
  return 0.5 * s;
}

double area(const Polygon& poly) {
  double a = std::abs(signed_area(poly.outer));
  for (const auto& h : poly.holes) a -= std::abs(signed_area(h));
  return a;
}

double area(const MultiPolygon& mp) {
  double a = 0;
  for (const auto& p : mp) a += area(p);
  return a;
}

Vec2 centroid(const MultiPolygon& mp) {
  double a_sum = 0, cx = 0, cy = 0;
  auto accumulate = [&](const Ring& r, double sign) {
    const std::size_t n = r.size();
    if (n < 3) return;
    const Vec2 o = r[0];
    double ra = 0, rx = 0, ry = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const Vec2 a = r[i] - o, b = r[i + 1] - o;
      const double c = cross(a, b);
      ra += c;
      rx += c * (a.x + b.x);
      ry += c * (a.y + b.y);
    }
    if (ra == 0) return;
    const double w = sign * std::abs(0.5 * ra);
    a_sum += w;
    cx += w * (o.x + rx / (3 * ra));
    cy += w * (o.y + ry / (3 * ra));
  };
  for (const auto& poly : mp) {
    accumulate(poly.outer, 1);
    for (const auto& h : poly.holes) accumulate(h, -1);
  }
  if (a_sum == 0) return mp.empty() || mp[0].outer.empty() ? Vec2{} : mp[0].outer[0];
  return {cx / a_sum, cy / a_sum};
}

Ring clip_ring(const Ring& ring, const HalfPlane& hp) {
  Ring out;
  const std::size_t n = ring.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 cur = ring[i];
    const Vec2 nxt = ring[(i + 1) % n];
    const double dc = dot(hp.normal, cur) - hp.offset;
    const double dn = dot(hp.normal, nxt) - hp.offset;
    const bool in_c = dc <= 0, in_n = dn <= 0;
    if (in_c) out.push_back(cur);
    if (in_c != in_n) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  // Drop consecutive duplicates created by vertices on the line.
  Ring dedup;
  dedup.reserve(out.size());
  for (const auto& v : out)
    if (dedup.empty() || !(dedup.back() == v)) dedup.push_back(v);
  while (dedup.size() > 1 && dedup.front() == dedup.back()) dedup.pop_back();
  if (dedup.size() < 3) dedup.clear();
  return dedup;
}

Polygon clip(const Polygon& poly, const HalfPlane& hp) {
  Polygon out;
  out.outer = clip_ring(poly.outer, hp);
  if (out.outer.empty()) return out;
  for (const auto& h : poly.holes) {
    Ring c = clip_ring(h, hp);
    if (!c.empty()) out.holes.push_back(std::move(c));
  }
  return out;
}

MultiPolygon clip(const MultiPolygon& mp, std::span<const HalfPlane> planes) {
  MultiPolygon out;
  for (const auto& poly : mp) {
    Polygon cur = poly;
    for (const auto& hp : planes) {
      cur = clip(cur, hp);
      if (cur.outer.empty()) break;
    }
    if (!cur.outer.empty() && std::abs(signed_area(cur.outer)) > 0) out.push_back(std::move(cur));
  }
  return out;
}

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(p - a, ab) / len2 : 0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

Location locate(Vec2 p, const MultiPolygon& mp, double tol) {
  bool on_edge = false;
  bool inside = false;
  for_each_edge(mp, [&](Vec2 a, Vec2 b) {
    if (on_edge) return;
    if (distance_to_segment(p, a, b) <= tol) {
      on_edge = true;
      return;
    }
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  });
  if (on_edge) return Location::boundary;
  return inside ? Location::inside : Location::outside;
}

double intersection_area(const MultiPolygon& a, const MultiPolygon& b) {
  if (a.empty() || b.empty()) return 0;
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  bbox_extend(a, lo_x, lo_y, hi_x, hi_y);
  bbox_extend(b, lo_x, lo_y, hi_x, hi_y);
  const double scale = std::max({hi_x - lo_x, hi_y - lo_y, std::abs(lo_x), std::abs(hi_x),
                                 std::abs(lo_y), std::abs(hi_y), 1e-300});
  const double tol = 1e-10 * scale;

  // Signed orientation matters: outers CCW and holes CW make the boundary
  // integral of the pieces equal to the enclosed area.
  double twice_area = 0;
  std::vector<double> ts;

  auto accumulate = [&](const MultiPolygon& self, const MultiPolygon& other, bool keep_shared) {
    for_each_edge(self, [&](Vec2 p, Vec2 q) {
      ts.assign({0.0, 1.0});
      split_params(p, q, other, tol, ts);
      std::sort(ts.begin(), ts.end());
      const Vec2 r = q - p;
      for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double t0 = ts[i], t1 = ts[i + 1];
        if (t1 - t0 <= 1e-15) continue;
        const Vec2 m = p + (0.5 * (t0 + t1)) * r;
        const Location loc = locate(m, other, tol);
        bool keep = loc == Location::inside;
        if (loc == Location::boundary && keep_shared) {
          // Shared edge piece: count once, and only when both boundaries run
          // the same way (the regions lie on the same side).
          for_each_edge(other, [&](Vec2 s, Vec2 s2) {
            if (keep) return;
            if (distance_to_segment(m, s, s2) <= tol) {
              const Vec2 d = s2 - s;
              if (std::abs(cross(d, r)) <= 1e-9 * norm(d) * norm(r) && dot(d, r) > 0) keep = true;
            }
          });
        }
        if (keep) {
          const Vec2 u = p + t0 * r, v = p + t1 * r;
          twice_area += cross(u, v);
        }
      }
    });
  };
  accumulate(a, b, true);
  accumulate(b, a, false);
  return std::max(0.0, 0.5 * twice_area);
}

bool ring_is_simple(std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  auto seg_intersect = [](Vec2 p1, Vec2 p2, Vec2 p3, Vec2 p4) {
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
      const double v = cross(b - a, c - a);
      return (v > 0) - (v < 0);
    };
    auto on_seg = [](Vec2 a, Vec2 b, Vec2 c) {
      return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
             c.y <= std::max(a.y, b.y);
    };
    const int o1 = orient(p1, p2, p3), o2 = orient(p1, p2, p4);
    const int o3 = orient(p3, p4, p1), o4 = orient(p3, p4, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_seg(p1, p2, p3)) return true;
    if (o2 == 0 && on_seg(p1, p2, p4)) return true;
    if (o3 == 0 && on_seg(p3, p4, p1)) return true;
    if (o4 == 0 && on_seg(p3, p4, p2)) return true;
    return false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (seg_intersect(a, b, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

void normalize_orientation(MultiPolygon& mp) {
  for (auto& poly : mp) {
    if (signed_area(poly.outer) < 0) std::reverse(poly.outer.begin(), poly.outer.end());
    for (auto& h : poly.holes)
      if (signed_area(h) > 0) std::reverse(h.begin(), h.end());
  }
}

}  // namespace ember::geom
