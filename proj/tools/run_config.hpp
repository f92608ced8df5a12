#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ember/event_type.hpp"
#include "ember/ingest.hpp"
#include "ember/timeutil.hpp"

namespace ember::cli {

enum class Granularity { neighborhood, station };

struct RunConfig {
  std::filesystem::path events;
  std::filesystem::path features;
  std::filesystem::path stations;
  std::filesystem::path geometry;
  EventFormat event_format;

  std::string timezone = "America/Edmonton";
  PeriodKind period_kind = PeriodKind::weekly;
  std::vector<EventType> event_types{kCoreEventTypes.begin(), kCoreEventTypes.end()};
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
  std::string feature_mode = "all";  // all | auto | list
  std::vector<std::string> feature_list;
  std::filesystem::path out = "ember-out";
  bool allow_network = false;
  Granularity granularity = Granularity::neighborhood;
  std::optional<Timestamp> span_start;
  std::optional<Timestamp> span_end;
  std::optional<Timestamp> cutoff;

  std::size_t n_trees = 1000;
  double importance_threshold = 0.05;
  std::size_t classes = 4;
  unsigned threads = 1;
};

/// Reads a JSON config; relative paths resolve against the file's directory.
/// Throws Error(parse) / Error(io).
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration (used for hashing). Input
/// paths contribute only their file names so relocated runs hash alike.
std::string config_to_json(const RunConfig& cfg);
/// FNV-1a 64 of config_to_json, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::string_view to_string(Granularity g);

/// "auto", "all" or comma-separated names.
void set_feature_spec(RunConfig& cfg, const std::string& spec);

}  // namespace ember::cli
