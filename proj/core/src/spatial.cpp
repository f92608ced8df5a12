#include "ember/spatial.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "ember/csv.hpp"
#include "ember/error.hpp"
#include "ember/log.hpp"

namespace ember {

VoronoiPartition voronoi(std::span<const Site> sites, const MultiPolygon& bounds) {
  if (sites.empty()) throw Error(Errc::invalid_argument, "voronoi: no stations");
  if (bounds.empty() || !(geom::area(bounds) > 0))
    throw Error(Errc::degenerate_boundary, "voronoi: bounding region has no area");
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j)
      if (sites[i].point == sites[j].point)
        throw Error(Errc::duplicate_station_points,
                    "voronoi: stations '" + sites[i].id + "' and '" + sites[j].id + "' share a location");

  VoronoiPartition out;
  out.bounding_region = bounds;
  geom::normalize_orientation(out.bounding_region);
  out.cells.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    VoronoiCell cell;
    cell.station_id = sites[i].id;
    cell.site = sites[i].point;
    const Vec2 si = sites[i].point;
    for (std::size_t j = 0; j < sites.size(); ++j) {
      if (j == i) continue;
      const Vec2 sj = sites[j].point;
      // |p - si|^2 <= |p - sj|^2  <=>  (sj - si) . p <= (|sj|^2 - |si|^2) / 2,
      // written about the midpoint to keep the offset well conditioned.
      const Vec2 n = sj - si;
      const Vec2 mid = 0.5 * (si + sj);
      cell.bisectors.push_back({n, dot(n, mid)});
    }
    cell.polygon = geom::clip(out.bounding_region, cell.bisectors);
    out.cells.push_back(std::move(cell));
  }
  return out;
}

std::size_t nearest_site(Vec2 p, std::span<const Site> sites) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const Vec2 d = p - sites[i].point;
    const double dd = dot(d, d);
    if (dd < best_d || (dd == best_d && sites[i].id < sites[best].id)) {
      best = i;
      best_d = dd;
    }
  }
  return best;
}

OverlapMatrix overlap_matrix(std::span<const PlanarRegion> neighborhoods, const VoronoiPartition& partition) {
  OverlapMatrix m;
  for (const auto& c : partition.cells) m.col_ids.push_back(c.station_id);
  const std::size_t nc = m.col_ids.size();
  m.w.assign(neighborhoods.size() * nc, 0.0);

  for (std::size_t i = 0; i < neighborhoods.size(); ++i) {
    const auto& nb = neighborhoods[i];
    m.row_ids.push_back(nb.region_id);
    MultiPolygon poly = nb.polygon;
    geom::normalize_orientation(poly);
    const double full = geom::area(poly);
    if (!(full > 0))
      throw Error(Errc::zero_area_neighborhood, "neighborhood '" + nb.region_id + "' has zero area");
    const double inside = geom::intersection_area(poly, partition.bounding_region);
    const bool contained = std::abs(inside - full) <= 1e-9 * full;
    if (!contained)
      log::warn("neighborhood '" + nb.region_id + "' extends past the bounding region; clipping (" +
                csv::format_number(100.0 * inside / full) + "% inside)");

    double total = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      const MultiPolygon piece = geom::clip(poly, partition.cells[j].bisectors);
      const double a =
          contained ? geom::area(piece) : geom::intersection_area(piece, partition.bounding_region);
      m.w[i * nc + j] = a;
      total += a;
    }
    if (!(total > 0))
      throw Error(Errc::zero_area_neighborhood,
                  "neighborhood '" + nb.region_id + "' does not intersect the bounding region");
    for (std::size_t j = 0; j < nc; ++j) m.w[i * nc + j] /= total;
  }
  return m;
}

FeatureTable redistribute_features(const FeatureTable& features, const OverlapMatrix& w) {
  if (features.rows() != w.row_ids.size())
    throw Error(Errc::region_mismatch, "redistribute: feature table has " + std::to_string(features.rows()) +
                                           " regions, overlap matrix has " + std::to_string(w.row_ids.size()));
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < features.rows(); ++r) row_of.emplace(features.region_ids()[r], r);
  const std::size_t nf = features.cols(), nc = w.col_ids.size();
  std::vector<double> out(nc * nf, 0.0);
  for (std::size_t i = 0; i < w.row_ids.size(); ++i) {
    auto it = row_of.find(w.row_ids[i]);
    if (it == row_of.end())
      throw Error(Errc::region_mismatch, "redistribute: region '" + w.row_ids[i] + "' has no features");
    const auto frow = features.row(it->second);
    for (std::size_t j = 0; j < nc; ++j) {
      const double wij = w.at(i, j);
      if (wij == 0) continue;
      for (std::size_t k = 0; k < nf; ++k) out[j * nf + k] += wij * frow[k];
    }
  }
  return FeatureTable(w.col_ids, features.feature_names(), std::move(out));
}

RegionIndex::RegionIndex(std::vector<PlanarRegion> regions) : regions_(std::move(regions)) {
  double scale = 0;
  for (const auto& r : regions_) {
    Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& poly : r.polygon)
      for (const auto& v : poly.outer) {
        b.lo_x = std::min(b.lo_x, v.x);
        b.lo_y = std::min(b.lo_y, v.y);
        b.hi_x = std::max(b.hi_x, v.x);
        b.hi_y = std::max(b.hi_y, v.y);
        scale = std::max({scale, std::abs(v.x), std::abs(v.y)});
      }
    boxes_.push_back(b);
  }
  tol_ = 1e-12 * std::max(1.0, scale);
}

std::optional<std::string> RegionIndex::assign(Vec2 p) const {
  const std::string* best = nullptr;
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const Box& b = boxes_[i];
    if (p.x < b.lo_x - tol_ || p.x > b.hi_x + tol_ || p.y < b.lo_y - tol_ || p.y > b.hi_y + tol_) continue;
    if (geom::locate(p, regions_[i].polygon, tol_) == geom::Location::outside) continue;
    if (!best || regions_[i].region_id < *best) best = &regions_[i].region_id;
  }
  if (!best) return std::nullopt;
  return *best;
}

std::optional<std::string> assign_region(Vec2 p, std::span<const PlanarRegion> regions) {
  return RegionIndex(std::vector<PlanarRegion>(regions.begin(), regions.end())).assign(p);
}

std::string overlap_to_csv(const OverlapMatrix& w) {
  std::vector<std::string> fields{"region_id"};
  for (const auto& c : w.col_ids) fields.push_back(c);
  std::string out = csv::join(fields) + "\n";
  for (std::size_t i = 0; i < w.row_ids.size(); ++i) {
    fields.assign({w.row_ids[i]});
    for (std::size_t j = 0; j < w.col_ids.size(); ++j) fields.push_back(csv::format_number(w.at(i, j)));
    out += csv::join(fields) + "\n";
  }
  return out;
}

std::string partition_to_geojson(const VoronoiPartition& partition, const LocalProjection& projection,
                                 const std::vector<std::pair<std::string, geojson::Value>>& metadata) {
  std::vector<geojson::Feature> features;
  for (const auto& c : partition.cells) {
    geojson::Feature f;
    f.geometry = projection.inverse(c.polygon);
    f.properties.emplace_back("station_id", c.station_id);
    f.properties.emplace_back("area_m2", geom::area(c.polygon));
    features.push_back(std::move(f));
  }
  return geojson::write_feature_collection(features, metadata);
}

}  // namespace ember
