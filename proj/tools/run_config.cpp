#include "run_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ember/error.hpp"

namespace ember::cli {

using nlohmann::ordered_json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

Timestamp timestamp_field(const ordered_json& j, const char* key) {
  auto t = parse_timestamp(j.get<std::string>(), TimeZone::utc());
  if (!t) throw Error(Errc::parse, std::string("config: bad timestamp for '") + key + "'");
  return *t;
}

}  // namespace

std::string_view to_string(Granularity g) { return g == Granularity::station ? "station" : "neighborhood"; }

void set_feature_spec(RunConfig& cfg, const std::string& spec) {
  cfg.feature_list.clear();
  if (spec == "auto" || spec == "all") {
    cfg.feature_mode = spec;
    return;
  }
  cfg.feature_mode = "list";
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) cfg.feature_list.push_back(item);
  if (cfg.feature_list.empty()) throw Error(Errc::invalid_argument, "empty feature list");
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open config '" + path.string() + "'");
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw Error(Errc::parse, "config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  RunConfig c;
  try {
    for (auto& [key, v] : j.items()) {
      if (key == "events") c.events = resolve(base, v.get<std::string>());
      else if (key == "features") c.features = resolve(base, v.get<std::string>());
      else if (key == "stations") c.stations = resolve(base, v.get<std::string>());
      else if (key == "geometry") c.geometry = resolve(base, v.get<std::string>());
      else if (key == "timezone") c.timezone = v.get<std::string>();
      else if (key == "period_kind") {
        auto k = parse_period_kind(v.get<std::string>());
        if (!k) throw Error(Errc::parse, "config: unknown period_kind");
        c.period_kind = *k;
      } else if (key == "event_types") {
        c.event_types.clear();
        for (const auto& t : v) {
          auto et = parse_event_type(t.get<std::string>());
          if (!et) throw Error(Errc::unknown_event_type, "config: unknown event type '" + t.get<std::string>() + "'");
          c.event_types.push_back(*et);
        }
      } else if (key == "train_fraction") c.train_fraction = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "features_subset") {
        if (v.is_array()) {
          c.feature_mode = "list";
          c.feature_list = v.get<std::vector<std::string>>();
        } else {
          set_feature_spec(c, v.get<std::string>());
        }
      } else if (key == "out") c.out = resolve(base, v.get<std::string>());
      else if (key == "allow_network") c.allow_network = v.get<bool>();
      else if (key == "granularity") {
        const auto g = v.get<std::string>();
        if (g == "station") c.granularity = Granularity::station;
        else if (g == "neighborhood") c.granularity = Granularity::neighborhood;
        else throw Error(Errc::parse, "config: granularity must be neighborhood or station");
      } else if (key == "span") {
        if (v.contains("start")) c.span_start = timestamp_field(v.at("start"), "span.start");
        if (v.contains("end")) c.span_end = timestamp_field(v.at("end"), "span.end");
      } else if (key == "cutoff") c.cutoff = timestamp_field(v, "cutoff");
      else if (key == "n_trees") c.n_trees = v.get<std::size_t>();
      else if (key == "importance_threshold") c.importance_threshold = v.get<double>();
      else if (key == "classes") c.classes = v.get<std::size_t>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else if (key == "event_format") {
        auto& f = c.event_format;
        f.id_column = v.value("id_column", f.id_column);
        f.time_column = v.value("time_column", f.time_column);
        f.type_column = v.value("type_column", f.type_column);
        f.lon_column = v.value("lon_column", f.lon_column);
        f.lat_column = v.value("lat_column", f.lat_column);
        f.region_column = v.value("region_column", f.region_column);
        if (v.contains("type_aliases"))
          f.type_aliases = v.at("type_aliases").get<std::map<std::string, std::string>>();
      } else {
        throw Error(Errc::parse, "config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("config: ") + e.what());
  }
  return c;
}

std::string config_to_json(const RunConfig& c) {
  ordered_json j;
  j["events"] = c.events.filename().generic_string();
  j["features"] = c.features.filename().generic_string();
  j["stations"] = c.stations.filename().generic_string();
  j["geometry"] = c.geometry.filename().generic_string();
  j["event_format"] = {{"id_column", c.event_format.id_column},
                       {"time_column", c.event_format.time_column},
                       {"type_column", c.event_format.type_column},
                       {"lon_column", c.event_format.lon_column},
                       {"lat_column", c.event_format.lat_column},
                       {"region_column", c.event_format.region_column},
                       {"type_aliases", c.event_format.type_aliases}};
  j["timezone"] = c.timezone;
  j["period_kind"] = std::string(ember::to_string(c.period_kind));
  std::vector<std::string> types;
  for (auto t : c.event_types) types.emplace_back(ember::to_string(t));
  j["event_types"] = types;
  j["train_fraction"] = c.train_fraction;
  j["seed"] = c.seed;
  if (c.feature_mode == "list") j["features_subset"] = c.feature_list;
  else j["features_subset"] = c.feature_mode;
  j["granularity"] = std::string(to_string(c.granularity));
  j["allow_network"] = c.allow_network;
  if (c.span_start) j["span"]["start"] = format_timestamp(*c.span_start);
  if (c.span_end) j["span"]["end"] = format_timestamp(*c.span_end);
  if (c.cutoff) j["cutoff"] = format_timestamp(*c.cutoff);
  j["n_trees"] = c.n_trees;
  j["importance_threshold"] = c.importance_threshold;
  j["classes"] = c.classes;
  return j.dump();
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ember::cli
