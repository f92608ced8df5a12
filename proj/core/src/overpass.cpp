#include <string>
#include <vector>

#include "ember/ingest.hpp"

namespace ember {
namespace {

struct CategoryTags {
  const char* name;
  const char* key;
  std::vector<const char*> values;
};

// OSM tag groupings for the point-of-interest features.
const std::vector<CategoryTags>& category_table() {
  static const std::vector<CategoryTags> table = {
      {"Food", "amenity", {"bar", "cafe", "fast_food", "food_court", "pub", "restaurant"}},
      {"Education", "amenity", {"college", "kindergarten", "library", "school", "university"}},
      {"Healthcare", "amenity", {"clinic", "hospital"}},
      {"Entertainment",
       "amenity",
       {"arts_centre", "cinema", "community_centre", "events_venue", "nightclub", "theatre"}},
      {"Public Service", "amenity", {"courthouse", "fire_station", "police", "townhall"}},
      {"Commercial", "building", {"office", "commercial", "government"}},
      {"Retail", "building", {"retail"}},
      {"traffic_lights", "highway", {"traffic_signals"}},
      {"bus_stops", "highway", {"bus_stop"}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& overpass_categories() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : category_table()) n.emplace_back(c.name);
    return n;
  }();
  return names;
}

std::string build_overpass_query(const std::string& category, const std::string& area_name) {
  const CategoryTags* tags = nullptr;
  for (const auto& c : category_table())
    if (category == c.name) tags = &c;
  if (!tags) throw Error(Errc::unknown_category, "unknown PoI category '" + category + "'");

  std::string alternation;
  for (std::size_t i = 0; i < tags->values.size(); ++i) {
    if (i) alternation += '|';
    alternation += tags->values[i];
  }
  std::string escaped_area;
  for (char c : area_name) {
    if (c == '"' || c == '\\') escaped_area += '\\';
    escaped_area += c;
  }
  const std::string filter = std::string("[\"") + tags->key + "\"~\"^(" + alternation + ")$\"]";

  std::string q;
  q += "[out:json][timeout:180];\n";
  q += "area[\"name\"=\"" + escaped_area + "\"][\"boundary\"=\"administrative\"]->.searchArea;\n";
  q += "(\n";
  for (const char* element : {"node", "way", "relation"})
    q += std::string("  ") + element + filter + "(area.searchArea);\n";
  q += ");\n";
  q += "out center;\n";
  return q;
}

}  // namespace ember
