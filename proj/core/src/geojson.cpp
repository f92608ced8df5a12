#include "ember/geojson.hpp"

#include <json.hpp>

#include "ember/error.hpp"
#include "ember/ingest.hpp"

namespace ember {
namespace geojson {
namespace {

nlohmann::json to_json(const Value& v) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>)
          return nullptr;
        else
          return x;
      },
      v);
}

nlohmann::json ring_json(const std::vector<LonLat>& ring) {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& p : ring) r.push_back({p.lon, p.lat});
  if (!ring.empty()) r.push_back({ring.front().lon, ring.front().lat});
  return r;
}

}  // namespace

std::string write_feature_collection(const std::vector<Feature>& features,
                                     const std::vector<std::pair<std::string, Value>>& metadata) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  if (!metadata.empty()) {
    nlohmann::ordered_json meta;
    for (const auto& [k, v] : metadata) meta[k] = to_json(v);
    fc["metadata"] = meta;
  }
  fc["features"] = nlohmann::ordered_json::array();
  for (const auto& f : features) {
    nlohmann::ordered_json feat;
    feat["type"] = "Feature";
    nlohmann::ordered_json props = nlohmann::ordered_json::object();
    for (const auto& [k, v] : f.properties) props[k] = to_json(v);
    feat["properties"] = props;
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& poly : f.geometry) {
      nlohmann::json rings = nlohmann::json::array();
      rings.push_back(ring_json(poly.outer));
      for (const auto& h : poly.holes) rings.push_back(ring_json(h));
      coords.push_back(rings);
    }
    feat["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", coords}};
    fc["features"].push_back(feat);
  }
  return fc.dump() + "\n";
}

}  // namespace geojson

namespace {

std::vector<LonLat> parse_ring(const nlohmann::json& j, const std::string& id) {
  if (!j.is_array() || j.size() < 4)
    throw Error(Errc::invalid_geometry, "region '" + id + "': ring needs at least 4 positions");
  std::vector<LonLat> ring;
  ring.reserve(j.size());
  for (const auto& pos : j) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
      throw Error(Errc::invalid_geometry, "region '" + id + "': malformed position");
    const LonLat p{pos[0].get<double>(), pos[1].get<double>()};
    if (p.lon < -180 || p.lon > 180 || p.lat < -90 || p.lat > 90)
      throw Error(Errc::invalid_coordinate, "region '" + id + "': coordinate out of range");
    ring.push_back(p);
  }
  if (!(ring.front() == ring.back()))
    throw Error(Errc::invalid_geometry, "region '" + id + "': ring is not closed");
  ring.pop_back();
  return ring;
}

Ring as_planar(const std::vector<LonLat>& r) {
  Ring out;
  out.reserve(r.size());
  for (const auto& p : r) out.push_back({p.lon, p.lat});
  return out;
}

GeoPolygon parse_polygon(const nlohmann::json& rings, const std::string& id) {
  if (!rings.is_array() || rings.empty())
    throw Error(Errc::invalid_geometry, "region '" + id + "': polygon without rings");
  GeoPolygon poly;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    auto ring = parse_ring(rings[i], id);
    const Ring planar = as_planar(ring);
    if (!geom::ring_is_simple(planar))
      throw Error(Errc::invalid_geometry, "region '" + id + "': self-intersecting ring");
    const double a = geom::signed_area(planar);
    if (a == 0) throw Error(Errc::invalid_geometry, "region '" + id + "': zero-area ring");
    const bool want_ccw = i == 0;
    if ((a > 0) != want_ccw) std::reverse(ring.begin(), ring.end());
    if (i == 0)
      poly.outer = std::move(ring);
    else
      poly.holes.push_back(std::move(ring));
  }
  return poly;
}

}  // namespace

std::vector<RegionGeometry> parse_region_geometry(std::string_view geojson_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(geojson_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw Error(Errc::invalid_geometry, "GeoJSON: expected a FeatureCollection");
  std::vector<RegionGeometry> out;
  for (const auto& f : doc["features"]) {
    const auto& props = f.contains("properties") ? f["properties"] : nlohmann::json();
    if (!props.is_object() || !props.contains("region_id"))
      throw Error(Errc::invalid_geometry, "GeoJSON: feature without region_id property");
    const auto& rid = props["region_id"];
    std::string id;
    if (rid.is_string())
      id = rid.get<std::string>();
    else if (rid.is_number_integer())
      id = std::to_string(rid.get<long long>());
    else
      throw Error(Errc::invalid_geometry, "GeoJSON: region_id must be a string or integer");
    for (const auto& existing : out)
      if (existing.region_id == id) throw Error(Errc::duplicate_region, "duplicate region '" + id + "'");
    if (!f.contains("geometry") || !f["geometry"].is_object())
      throw Error(Errc::invalid_geometry, "region '" + id + "': missing geometry");
    const auto& g = f["geometry"];
    const std::string type = g.value("type", "");
    RegionGeometry rg;
    rg.region_id = id;
    if (type == "Polygon") {
      rg.polygon.push_back(parse_polygon(g["coordinates"], id));
    } else if (type == "MultiPolygon") {
      for (const auto& p : g["coordinates"]) rg.polygon.push_back(parse_polygon(p, id));
      if (rg.polygon.empty()) throw Error(Errc::invalid_geometry, "region '" + id + "': empty MultiPolygon");
    } else {
      throw Error(Errc::invalid_geometry, "region '" + id + "': unsupported geometry type '" + type + "'");
    }
    out.push_back(std::move(rg));
  }
  return out;
}

}  // namespace ember
