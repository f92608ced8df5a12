#include "ember/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ember/csv.hpp"
#include "ember/log.hpp"

namespace ember {

// ---- FeatureTable ---------------------------------------------------------

FeatureTable::FeatureTable(std::vector<std::string> region_ids, std::vector<std::string> feature_names,
                           std::vector<double> values)
    : region_ids_(std::move(region_ids)),
      feature_names_(std::move(feature_names)),
      values_(std::move(values)) {
  if (values_.size() != region_ids_.size() * feature_names_.size())
    throw Error(Errc::invalid_argument, "feature table: value count does not match dimensions");
  std::unordered_set<std::string> seen;
  for (const auto& id : region_ids_)
    if (!seen.insert(id).second) throw Error(Errc::duplicate_region, "duplicate region '" + id + "'");
  seen.clear();
  for (const auto& n : feature_names_)
    if (!seen.insert(n).second) throw Error(Errc::invalid_argument, "duplicate feature '" + n + "'");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v))
      throw Error(Errc::malformed_value, "feature table: non-finite value");
    if (v < 0)
      throw Error(Errc::negative_value, "feature table: negative value at region '" +
                                            region_ids_[i / feature_names_.size()] + "', feature '" +
                                            feature_names_[i % feature_names_.size()] + "'");
  }
}

std::vector<double> FeatureTable::column(std::size_t c) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
  return out;
}

std::optional<std::size_t> FeatureTable::region_index(const std::string& id) const {
  auto it = std::find(region_ids_.begin(), region_ids_.end(), id);
  if (it == region_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - region_ids_.begin());
}

std::optional<std::size_t> FeatureTable::feature_index(const std::string& name) const {
  auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  if (it == feature_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names_.begin());
}

FeatureTable FeatureTable::select(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    auto i = feature_index(n);
    if (!i) throw Error(Errc::unknown_feature, "unknown feature '" + n + "'");
    idx.push_back(*i);
  }
  std::vector<double> vals;
  vals.reserve(rows() * idx.size());
  for (std::size_t r = 0; r < rows(); ++r)
    for (auto c : idx) vals.push_back(at(r, c));
  return FeatureTable(region_ids_, names, std::move(vals));
}

// ---- events ---------------------------------------------------------------

const TimeZone& default_time_zone() {
  static const TimeZone zone = TimeZone::named("America/Edmonton");
  return zone;
}

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

std::optional<std::size_t> column_of(const std::vector<std::string>& header, const std::string& name) {
  if (name.empty()) return std::nullopt;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  return std::nullopt;
}

}  // namespace

EventParseResult parse_events(std::istream& in, const EventFormat& format, const TimeZone& zone) {
  csv::Reader reader(in);
  auto header_row = reader.next();
  if (!header_row) throw Error(Errc::empty_table, "events: empty input");
  std::vector<std::string> header;
  for (const auto& h : header_row->fields) header.push_back(trim(h));

  auto require = [&](const std::string& name) {
    auto c = column_of(header, name);
    if (!c) throw Error(Errc::missing_column, "events: missing column '" + name + "'");
    return *c;
  };
  const std::size_t c_id = require(format.id_column);
  const std::size_t c_time = require(format.time_column);
  const std::size_t c_type = require(format.type_column);
  const auto c_lon = column_of(header, format.lon_column);
  const auto c_lat = column_of(header, format.lat_column);
  const auto c_region = column_of(header, format.region_column);
  if (c_lon.has_value() != c_lat.has_value())
    throw Error(Errc::missing_column, "events: lon and lat columns must both be present");
  if (!c_lon && !c_region)
    throw Error(Errc::missing_column, "events: need lon/lat or region column");

  std::vector<std::string> unknown;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == c_id || i == c_time || i == c_type || (c_lon && i == *c_lon) || (c_lat && i == *c_lat) ||
        (c_region && i == *c_region))
      continue;
    unknown.push_back(header[i]);
  }
  if (!unknown.empty()) {
    std::string msg = "events: ignoring unknown columns:";
    for (const auto& u : unknown) msg += " " + u;
    log::warn(msg);
  }

  EventParseResult result;
  while (auto row = reader.next()) {
    const auto line = row->line;
    auto fail = [&](Errc code, std::string msg) {
      result.errors.push_back({line, code, "line " + std::to_string(line) + ": " + std::move(msg)});
    };
    const auto& f = row->fields;
    if (f.size() != header.size()) {
      fail(Errc::malformed_row, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(f.size()));
      continue;
    }
    EventRecord rec;
    rec.event_id = trim(f[c_id]);

    std::string type_text = trim(f[c_type]);
    if (auto a = format.type_aliases.find(type_text); a != format.type_aliases.end()) type_text = a->second;
    auto type = parse_event_type(type_text);
    if (!type) {
      fail(Errc::unknown_event_type, "unknown event type '" + type_text + "'");
      continue;
    }
    rec.event_type = *type;

    auto ts = parse_timestamp(f[c_time], zone);
    if (!ts) {
      fail(Errc::malformed_timestamp, "malformed timestamp '" + trim(f[c_time]) + "'");
      continue;
    }
    rec.dispatch_time = *ts;

    if (c_lon) {
      const std::string lon_s = trim(f[*c_lon]), lat_s = trim(f[*c_lat]);
      if (!lon_s.empty() || !lat_s.empty()) {
        auto lon = csv::parse_number(lon_s);
        auto lat = csv::parse_number(lat_s);
        if (!lon || !lat) {
          fail(Errc::invalid_coordinate, "unparseable coordinates '" + lon_s + "','" + lat_s + "'");
          continue;
        }
        if (*lon < -180 || *lon > 180 || *lat < -90 || *lat > 90) {
          fail(Errc::invalid_coordinate, "coordinates out of range");
          continue;
        }
        rec.location = LonLat{*lon, *lat};
      }
    }
    if (c_region) {
      std::string r = trim(f[*c_region]);
      if (!r.empty()) rec.region_id = std::move(r);
    }
    if (!rec.location && !rec.region_id) {
      fail(Errc::missing_location, "neither coordinates nor region_id");
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

EventParseResult parse_events(const std::filesystem::path& path, const EventFormat& format,
                              const TimeZone& zone) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  return parse_events(in, format, zone);
}

std::string write_events(const std::vector<EventRecord>& events) {
  std::string out = "event_id,dispatch_time,event_type,lon,lat,region_id\n";
  for (const auto& e : events) {
    out += csv::join({e.event_id, format_timestamp(e.dispatch_time), std::string(to_string(e.event_type)),
                      e.location ? csv::format_number(e.location->lon) : "",
                      e.location ? csv::format_number(e.location->lat) : "", e.region_id.value_or("")}) +
           "\n";
  }
  return out;
}

// ---- feature tables -------------------------------------------------------

FeatureTable parse_feature_table(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(Errc::empty_table, "feature table: empty input");
  const auto& header = rows[0].fields;
  if (header.size() < 2) throw Error(Errc::empty_table, "feature table: no feature columns");
  if (rows.size() < 2) throw Error(Errc::empty_table, "feature table: no region rows");
  std::vector<std::string> names;
  for (std::size_t c = 1; c < header.size(); ++c) names.push_back(trim(header[c]));
  std::vector<std::string> ids;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const auto line = rows[r].line;
    if (f.size() != header.size())
      throw Error(Errc::malformed_row, "feature table line " + std::to_string(line) + ": expected " +
                                           std::to_string(header.size()) + " fields",
                  static_cast<long>(line));
    std::string id = trim(f[0]);
    if (id.empty())
      throw Error(Errc::malformed_value, "feature table line " + std::to_string(line) + ": empty region_id",
                  static_cast<long>(line));
    if (!seen.insert(id).second)
      throw Error(Errc::duplicate_region,
                  "feature table line " + std::to_string(line) + ": duplicate region '" + id + "'",
                  static_cast<long>(line));
    for (std::size_t c = 1; c < f.size(); ++c) {
      auto v = csv::parse_number(f[c]);
      const std::string where = "row " + std::to_string(line) + " (region '" + id + "'), col " +
                                std::to_string(c + 1) + " (" + names[c - 1] + ")";
      if (!v) throw Error(Errc::malformed_value, "feature table " + where + ": missing or non-numeric value",
                          static_cast<long>(line));
      if (*v < 0) throw Error(Errc::negative_value, "feature table " + where + ": negative value",
                              static_cast<long>(line));
      values.push_back(*v == 0 ? 0.0 : *v);
    }
    ids.push_back(std::move(id));
  }
  return FeatureTable(std::move(ids), std::move(names), std::move(values));
}

FeatureTable parse_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  return parse_feature_table(in);
}

std::string write_feature_table(const FeatureTable& table) {
  std::string out;
  std::vector<std::string> fields{"region_id"};
  for (const auto& n : table.feature_names()) fields.push_back(n);
  out += csv::join(fields) + "\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    fields.assign({table.region_ids()[r]});
    for (double v : table.row(r)) fields.push_back(csv::format_number(v));
    out += csv::join(fields) + "\n";
  }
  return out;
}

// ---- stations -------------------------------------------------------------

StationSet parse_stations(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(Errc::empty_table, "stations: empty input");
  std::vector<std::string> header;
  for (const auto& h : rows[0].fields) header.push_back(trim(h));
  auto col = [&](const char* n) {
    auto c = column_of(header, n);
    if (!c) throw Error(Errc::missing_column, std::string("stations: missing column '") + n + "'");
    return *c;
  };
  const auto c_id = col("station_id"), c_lon = col("lon"), c_lat = col("lat");
  StationSet set;
  std::set<std::string> ids;
  std::set<std::pair<double, double>> points;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const auto line = static_cast<long>(rows[r].line);
    const std::string at = "stations line " + std::to_string(line);
    if (f.size() != header.size()) throw Error(Errc::malformed_row, at + ": wrong field count", line);
    Station s;
    s.station_id = trim(f[c_id]);
    auto lon = csv::parse_number(f[c_lon]);
    auto lat = csv::parse_number(f[c_lat]);
    if (!lon || !lat) throw Error(Errc::malformed_value, at + ": bad coordinates", line);
    if (*lon < -180 || *lon > 180 || *lat < -90 || *lat > 90)
      throw Error(Errc::invalid_coordinate, at + ": coordinates out of range", line);
    s.point = {*lon, *lat};
    if (!ids.insert(s.station_id).second)
      throw Error(Errc::duplicate_station, at + ": duplicate station '" + s.station_id + "'", line);
    if (!points.insert({*lon, *lat}).second)
      throw Error(Errc::duplicate_station_points, at + ": station '" + s.station_id + "' repeats a location", line);
    set.stations.push_back(std::move(s));
  }
  if (set.stations.empty()) throw Error(Errc::empty_table, "stations: no rows");
  return set;
}

StationSet parse_stations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  return parse_stations(in);
}

std::string write_stations(const StationSet& stations) {
  std::string out = "station_id,lon,lat\n";
  for (const auto& s : stations.stations)
    out += csv::join({s.station_id, csv::format_number(s.point.lon), csv::format_number(s.point.lat)}) + "\n";
  return out;
}

std::vector<RegionGeometry> parse_region_geometry(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_region_geometry(std::string_view(ss.str()));
}

}  // namespace ember
