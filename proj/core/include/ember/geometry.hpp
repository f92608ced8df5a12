#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace ember {

/// WGS84 position in degrees.
struct LonLat {
  double lon = 0;
  double lat = 0;
  friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Planar position in meters (local projection) or abstract units.
struct Vec2 {
  double x = 0;
  double y = 0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Rings are stored open: the closing vertex is not repeated.
template <class P>
struct BasicPolygon {
  std::vector<P> outer;               // counter-clockwise
  std::vector<std::vector<P>> holes;  // clockwise
};

template <class P>
using BasicMultiPolygon = std::vector<BasicPolygon<P>>;

using Ring = std::vector<Vec2>;
using Polygon = BasicPolygon<Vec2>;
using MultiPolygon = BasicMultiPolygon<Vec2>;
using GeoPolygon = BasicPolygon<LonLat>;
using GeoMultiPolygon = BasicMultiPolygon<LonLat>;

/// Points satisfying dot(normal, p) <= offset.
struct HalfPlane {
  Vec2 normal;
  double offset = 0;
};

namespace geom {

/// Shoelace signed area; positive for counter-clockwise rings.
double signed_area(std::span<const Vec2> ring);
double area(const Polygon& poly);
double area(const MultiPolygon& mp);

/// Area-weighted centroid of the outer rings minus holes.
Vec2 centroid(const MultiPolygon& mp);

/// Sutherland-Hodgman clip of a ring against one half-plane. Works for
/// non-convex rings; the result may contain zero-width bridges, which carry
/// no area.
Ring clip_ring(const Ring& ring, const HalfPlane& hp);
Polygon clip(const Polygon& poly, const HalfPlane& hp);
MultiPolygon clip(const MultiPolygon& mp, std::span<const HalfPlane> planes);

enum class Location { outside, boundary, inside };

/// Even-odd containment over all rings. `tol` is the absolute distance under
/// which a point counts as lying on an edge.
Location locate(Vec2 p, const MultiPolygon& mp, double tol = 1e-12);

/// Area of a ∩ b for polygons with holes (outer CCW, holes CW), via the
/// boundary integral over edge pieces of each operand lying inside the other.
double intersection_area(const MultiPolygon& a, const MultiPolygon& b);

/// True when no two non-adjacent edges of the ring intersect.
bool ring_is_simple(std::span<const Vec2> ring);

/// Reorients rings in place: outer CCW, holes CW.
void normalize_orientation(MultiPolygon& mp);

double distance_to_segment(Vec2 p, Vec2 a, Vec2 b);

}  // namespace geom
}  // namespace ember
