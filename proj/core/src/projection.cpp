#include "ember/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ember/error.hpp"

namespace ember {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

double haversine_m(LonLat a, LonLat b) {
  const double p1 = a.lat * kDeg, p2 = b.lat * kDeg;
  const double dp = p2 - p1, dl = (b.lon - a.lon) * kDeg;
  const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

LocalProjection::LocalProjection(LonLat origin)
    : origin_(origin), sin_lat0_(std::sin(origin.lat * kDeg)), cos_lat0_(std::cos(origin.lat * kDeg)) {}

Vec2 LocalProjection::forward(LonLat p) const {
  const double lat = p.lat * kDeg;
  const double dl = (p.lon - origin_.lon) * kDeg;
  const double sin_lat = std::sin(lat), cos_lat = std::cos(lat);
  const double cos_c = std::clamp(sin_lat0_ * sin_lat + cos_lat0_ * cos_lat * std::cos(dl), -1.0, 1.0);
  const double c = std::acos(cos_c);
  // c / sin(c), with the series near the origin where acos loses precision.
  double k;
  if (c < 1e-4) {
    k = 1.0 + c * c / 6.0;
  } else {
    k = c / std::sin(c);
  }
  const double x = k * cos_lat * std::sin(dl);
  const double y = k * (cos_lat0_ * sin_lat - sin_lat0_ * cos_lat * std::cos(dl));
  return {kEarthRadiusM * x, kEarthRadiusM * y};
}

LonLat LocalProjection::inverse(Vec2 q) const {
  const double x = q.x / kEarthRadiusM, y = q.y / kEarthRadiusM;
  const double rho = std::hypot(x, y);
  if (rho == 0) return origin_;
  const double c = rho;
  const double sin_c = std::sin(c), cos_c = std::cos(c);
  const double lat = std::asin(std::clamp(cos_c * sin_lat0_ + y * sin_c * cos_lat0_ / rho, -1.0, 1.0));
  const double lon = origin_.lon * kDeg + std::atan2(x * sin_c, rho * cos_lat0_ * cos_c - y * sin_lat0_ * sin_c);
  return {lon / kDeg, lat / kDeg};
}

MultiPolygon LocalProjection::forward(const GeoMultiPolygon& mp) const {
  MultiPolygon out;
  out.reserve(mp.size());
  for (const auto& poly : mp) {
    Polygon p;
    for (const auto& v : poly.outer) p.outer.push_back(forward(v));
    for (const auto& h : poly.holes) {
      Ring r;
      for (const auto& v : h) r.push_back(forward(v));
      p.holes.push_back(std::move(r));
    }
    out.push_back(std::move(p));
  }
  return out;
}

GeoMultiPolygon LocalProjection::inverse(const MultiPolygon& mp) const {
  GeoMultiPolygon out;
  out.reserve(mp.size());
  for (const auto& poly : mp) {
    GeoPolygon p;
    for (const auto& v : poly.outer) p.outer.push_back(inverse(v));
    for (const auto& h : poly.holes) {
      std::vector<LonLat> r;
      for (const auto& v : h) r.push_back(inverse(v));
      p.holes.push_back(std::move(r));
    }
    out.push_back(std::move(p));
  }
  return out;
}

LocalProjection fit_projection(std::span<const LonLat> points) {
  if (points.empty()) throw Error(Errc::invalid_argument, "projection: no points");
  double lo_lon = points[0].lon, hi_lon = lo_lon, lo_lat = points[0].lat, hi_lat = lo_lat;
  double sum_lon = 0, sum_lat = 0;
  for (const auto& p : points) {
    lo_lon = std::min(lo_lon, p.lon);
    hi_lon = std::max(hi_lon, p.lon);
    lo_lat = std::min(lo_lat, p.lat);
    hi_lat = std::max(hi_lat, p.lat);
    sum_lon += p.lon;
    sum_lat += p.lat;
  }
  const double span = haversine_m({lo_lon, lo_lat}, {hi_lon, hi_lat});
  if (span > kMaxProjectionExtentM || hi_lon - lo_lon > 180.0)
    throw Error(Errc::extent_too_large,
                "projection: input extent " + std::to_string(span / 1000.0) + " km exceeds 500 km");
  const double n = static_cast<double>(points.size());
  return LocalProjection(LonLat{sum_lon / n, sum_lat / n});
}

PlanarPoints project_to_plane(std::span<const LonLat> points) {
  PlanarPoints out{fit_projection(points), {}};
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(out.projection.forward(p));
  return out;
}

}  // namespace ember
