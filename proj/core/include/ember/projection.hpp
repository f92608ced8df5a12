#pragma once

#include <span>
#include <vector>

#include "ember/geometry.hpp"

namespace ember {

inline constexpr double kEarthRadiusM = 6371008.8;

/// Great-circle distance in meters.
double haversine_m(LonLat a, LonLat b);

/// Spherical azimuthal equidistant projection about `origin`; distances and
/// bearings from the origin are exact, others distort by < 0.1% across a
/// city-sized extent.
class LocalProjection {
 public:
  explicit LocalProjection(LonLat origin);

  LonLat origin() const { return origin_; }
  Vec2 forward(LonLat p) const;
  LonLat inverse(Vec2 q) const;

  MultiPolygon forward(const GeoMultiPolygon& mp) const;
  GeoMultiPolygon inverse(const MultiPolygon& mp) const;

 private:
  LonLat origin_;
  double sin_lat0_, cos_lat0_;
};

inline constexpr double kMaxProjectionExtentM = 500e3;

struct PlanarPoints {
  LocalProjection projection;
  std::vector<Vec2> points;
};

/// Projects about the mean position of the inputs. Throws
/// Error(extent_too_large) when the bounding-box diagonal exceeds 500 km and
/// Error(invalid_argument) for an empty input.
PlanarPoints project_to_plane(std::span<const LonLat> points);

/// Origin selection alone (same extent rule).
LocalProjection fit_projection(std::span<const LonLat> points);

}  // namespace ember
