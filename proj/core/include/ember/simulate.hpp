#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ember/feature_table.hpp"
#include "ember/ingest.hpp"
#include "ember/panel.hpp"
#include "ember/rng.hpp"

namespace ember {

struct FeatureGenerator {
  std::string name;
  double lo = 0;
  double hi = 1;
};

struct TypeTruth {
  EventType type = EventType::FR;
  std::vector<double> coefficients;  // intercept first, one per feature after
  double alpha = 0;
};

struct ScenarioSpec {
  std::size_t n_regions = 100;
  std::vector<FeatureGenerator> features;
  std::vector<TypeTruth> truths;
  PeriodKind period_kind = PeriodKind::weekly;
  std::size_t n_periods = 52;
  Timestamp start = Timestamp{std::chrono::seconds{1294012800}};  // Monday 2011-01-03 UTC
  double exposure = 1.0;
  std::size_t n_stations = 0;  // 0: one per ten regions, at least 2
  LonLat origin{-113.70, 53.40};
  double cell_deg_lon = 0.015;
  double cell_deg_lat = 0.009;
  std::uint64_t seed = 1;
};

/// Throws Error(invalid_argument) when a truth has the wrong coefficient
/// count, a negative alpha, or zero regions/periods.
void validate(const ScenarioSpec& spec);

/// Gamma-Poisson draw; alpha == 0 is plain Poisson.
std::int64_t sample_nb2(double mu, double alpha, rng::Engine& g);

struct Scenario {
  Panel panel;  // features joined, all truth types
  std::vector<EventRecord> events;
  FeatureTable features;
  StationSet stations;
  std::vector<RegionGeometry> regions;
  TimeSpan span;
};

/// Counts for cell (region r, period q, type) come from an engine keyed by
/// (seed, r, q, type), so output does not depend on generation order.
Scenario generate(const ScenarioSpec& spec);

std::string truth_to_json(const ScenarioSpec& spec);

/// Writes events.csv, features.csv, stations.csv, regions.geojson,
/// truth.json and a config.json the CLI can consume.
void write_scenario(const Scenario& scenario, const ScenarioSpec& spec, const std::filesystem::path& dir);

/// Three features, b = (1.0, 0.5, -0.25) style truth for one type.
ScenarioSpec default_scenario(std::uint64_t seed);

}  // namespace ember
