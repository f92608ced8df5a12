#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ember/error.hpp"
#include "ember/event_type.hpp"
#include "ember/feature_table.hpp"
#include "ember/geometry.hpp"
#include "ember/timeutil.hpp"

namespace ember {

struct EventRecord {
  std::string event_id;
  Timestamp dispatch_time;
  EventType event_type = EventType::XX;
  std::optional<LonLat> location;
  std::optional<std::string> region_id;
};

/// Column mapping for an events CSV. Empty lon/lat/region names mean the
/// column is absent from the export.
struct EventFormat {
  std::string id_column = "event_id";
  std::string time_column = "dispatch_time";
  std::string type_column = "event_type";
  std::string lon_column = "lon";
  std::string lat_column = "lat";
  std::string region_column = "region_id";
  /// Extra spellings accepted for type codes, e.g. {"Fire", "FR"}.
  std::map<std::string, std::string> type_aliases;
};

struct RowError {
  std::size_t line = 0;
  Errc code = Errc::parse;
  std::string message;
};

struct EventParseResult {
  std::vector<EventRecord> records;
  std::vector<RowError> errors;
};

/// The zone used for timestamps that carry no offset (America/Edmonton).
const TimeZone& default_time_zone();

/// One record or one RowError per data row, in file order. Header problems
/// (missing mapped columns) throw Error(missing_column); unknown extra
/// columns produce a warning.
EventParseResult parse_events(std::istream& in, const EventFormat& format = {},
                              const TimeZone& zone = default_time_zone());
EventParseResult parse_events(const std::filesystem::path& path, const EventFormat& format = {},
                              const TimeZone& zone = default_time_zone());

/// `event_id,dispatch_time,event_type,lon,lat,region_id` with UTC times;
/// absent values are empty cells.
std::string write_events(const std::vector<EventRecord>& events);

/// `region_id,<feature>...`; the first column names regions. Errors:
/// EmptyTable, DuplicateRegion, NegativeValue (row/col in message),
/// MalformedValue for missing or non-numeric cells.
FeatureTable parse_feature_table(std::istream& in);
FeatureTable parse_feature_table(const std::filesystem::path& path);
std::string write_feature_table(const FeatureTable& table);

struct Station {
  std::string station_id;
  LonLat point;
};

struct StationSet {
  std::vector<Station> stations;
};

/// `station_id,lon,lat`. Errors: DuplicateStation, DuplicateStationPoints,
/// InvalidCoordinate, MalformedValue.
StationSet parse_stations(std::istream& in);
StationSet parse_stations(const std::filesystem::path& path);
std::string write_stations(const StationSet& stations);

struct RegionGeometry {
  std::string region_id;
  GeoMultiPolygon polygon;
};

/// GeoJSON FeatureCollection of Polygon/MultiPolygon features carrying a
/// `region_id` property. Rings must be closed, simple and of positive area;
/// orientation is normalized to CCW exterior. Throws Error(invalid_geometry).
std::vector<RegionGeometry> parse_region_geometry(std::string_view geojson_text);
std::vector<RegionGeometry> parse_region_geometry(const std::filesystem::path& path);

// ---- remote sources -------------------------------------------------------

/// The nine grouped point-of-interest features.
const std::vector<std::string>& overpass_categories();

/// Overpass QL text selecting the OSM tags grouped under `category` inside
/// the named administrative area. Deterministic. Throws
/// Error(unknown_category).
std::string build_overpass_query(const std::string& category, const std::string& area_name = "Edmonton");

struct NetworkPolicy {
  bool allow = false;
  int timeout_seconds = 60;
};

inline constexpr const char* kDefaultOverpassUrl = "https://overpass-api.de/api/interpreter";

/// GETs `url` and writes the body atomically to `dest`. Throws
/// Error(network_disabled) unless policy.allow, Error(http_status) with the
/// status in detail(), Error(io) for transport or file failures.
std::uint64_t fetch_url_to_file(const std::string& url, const std::filesystem::path& dest,
                                const NetworkPolicy& policy);

/// POSTs an Overpass query (form field `data`) and writes the JSON response.
std::uint64_t fetch_overpass(const std::string& endpoint, const std::string& query,
                             const std::filesystem::path& dest, const NetworkPolicy& policy);

}  // namespace ember
