#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ember/geometry.hpp"

namespace ember::geojson {

using Value = std::variant<std::monostate, std::string, double, long long, bool>;

struct Feature {
  GeoMultiPolygon geometry;
  std::vector<std::pair<std::string, Value>> properties;
};

/// Serializes a FeatureCollection (rings closed, MultiPolygon geometry).
/// `metadata` entries are emitted under a top-level "metadata" member.
std::string write_feature_collection(const std::vector<Feature>& features,
                                     const std::vector<std::pair<std::string, Value>>& metadata = {});

}  // namespace ember::geojson
