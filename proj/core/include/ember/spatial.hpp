#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ember/feature_table.hpp"
#include "ember/geojson.hpp"
#include "ember/geometry.hpp"
#include "ember/projection.hpp"

namespace ember {

struct Site {
  std::string id;
  Vec2 point;
};

struct VoronoiCell {
  std::string station_id;
  Vec2 site;
  MultiPolygon polygon;
  /// Perpendicular-bisector half-planes whose intersection is the unbounded
  /// nearest-site region of this station.
  std::vector<HalfPlane> bisectors;
};

struct VoronoiPartition {
  std::vector<VoronoiCell> cells;
  MultiPolygon bounding_region;
};

/// Nearest-station cells clipped to `bounds`, one half-plane intersection per
/// station. Errors: DuplicateStationPoints, DegenerateBoundary (empty or
/// zero-area bounds), InvalidArgument (no stations).
VoronoiPartition voronoi(std::span<const Site> sites, const MultiPolygon& bounds);

/// Index of the nearest site; equal distances resolve to the smallest id.
std::size_t nearest_site(Vec2 p, std::span<const Site> sites);

struct PlanarRegion {
  std::string region_id;
  MultiPolygon polygon;
};

/// w(i, j) = share of neighborhood i's area inside station j's cell.
struct OverlapMatrix {
  std::vector<std::string> row_ids;  // neighborhoods
  std::vector<std::string> col_ids;  // stations
  std::vector<double> w;             // row-major

  double at(std::size_t i, std::size_t j) const { return w[i * col_ids.size() + j]; }
};

/// Neighborhoods extending past the bounding region are clipped to it with a
/// warning. Throws Error(zero_area_neighborhood).
OverlapMatrix overlap_matrix(std::span<const PlanarRegion> neighborhoods, const VoronoiPartition& partition);

/// f_station[j] = sum_i w(i, j) * f_neighborhood[i], rows matched by id.
/// Throws Error(region_mismatch) when the id sets differ.
FeatureTable redistribute_features(const FeatureTable& features, const OverlapMatrix& w);

/// Bounding-box accelerated point-in-region lookup. Points on a shared
/// boundary resolve to the lexicographically smallest touching region_id.
class RegionIndex {
 public:
  explicit RegionIndex(std::vector<PlanarRegion> regions);
  std::optional<std::string> assign(Vec2 p) const;
  const std::vector<PlanarRegion>& regions() const { return regions_; }

 private:
  struct Box {
    double lo_x, lo_y, hi_x, hi_y;
  };
  std::vector<PlanarRegion> regions_;
  std::vector<Box> boxes_;
  double tol_ = 0;
};

std::optional<std::string> assign_region(Vec2 p, std::span<const PlanarRegion> regions);

std::string overlap_to_csv(const OverlapMatrix& w);

/// Cells back in WGS84 with a `station_id` property.
std::string partition_to_geojson(const VoronoiPartition& partition, const LocalProjection& projection,
                                 const std::vector<std::pair<std::string, geojson::Value>>& metadata = {});

}  // namespace ember
