#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ember/event_type.hpp"
#include "ember/feature_table.hpp"
#include "ember/ingest.hpp"
#include "ember/timeutil.hpp"

namespace ember {

/// One (region, period, event type) cell.
struct Observation {
  std::string region_id;
  Timestamp period_start;
  PeriodKind period_kind = PeriodKind::weekly;
  double exposure = 1.0;
  EventType event_type = EventType::XX;
  std::int64_t count = 0;
  std::vector<double> x;  // aligned with Panel::feature_names
};

/// Half-open instant range [start, end).
struct TimeSpan {
  Timestamp start;
  Timestamp end;
};

/// Region x period x type grid. Zero-count cells are present; all cells share
/// `period_kind` and `feature_names`.
struct Panel {
  std::vector<std::string> feature_names;
  std::vector<Observation> observations;
  PeriodKind period_kind = PeriodKind::weekly;
  Timestamp first_period{};
  Timestamp last_period{};

  std::size_t size() const { return observations.size(); }
  bool empty() const { return observations.empty(); }

  /// Distinct values in order of first appearance.
  std::vector<std::string> region_ids() const;
  std::vector<EventType> event_types() const;
  std::vector<Timestamp> period_starts() const;

  /// Cells of one type; span and features carried over.
  Panel slice(EventType type) const;
};

struct AggregateStats {
  std::size_t counted = 0;         // events landing in a materialized cell
  std::size_t outside_span = 0;
  std::size_t unknown_region = 0;  // no region_id, or not in the region set
  std::size_t other_type = 0;
};

/// Period boundaries are the local civil calendar of `zone` (weeks from
/// Monday 00:00), converted to UTC. Periods not fully inside `span` are
/// dropped with a warning. Every (region, period, type) cell is materialized
/// with exposure 1. Regions are emitted in sorted id order. Throws
/// Error(empty_span) when no full period fits.
Panel aggregate(std::span<const EventRecord> events, std::span<const std::string> regions, PeriodKind kind,
                TimeSpan span, std::span<const EventType> types, const TimeZone& zone = TimeZone::utc(),
                AggregateStats* stats = nullptr);

/// Full-period starts (UTC) inside `span`, plus the end of the last one.
std::vector<Timestamp> period_boundaries(PeriodKind kind, TimeSpan span, const TimeZone& zone);

/// Smallest period-aligned span covering every event time.
TimeSpan covering_span(std::span<const EventRecord> events, PeriodKind kind, const TimeZone& zone);

/// Attaches each region's static covariates. `feature_subset` selects and
/// orders columns by name (all columns when empty). Errors:
/// MissingRegionFeatures, UnknownFeature.
Panel join_features(const Panel& counts, const FeatureTable& features,
                    const std::vector<std::string>& feature_subset = {});

struct Split {
  Panel train;
  Panel test;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
};

/// Observation-level sampling without replacement; round(train_fraction * n)
/// cells go to train. Both sides keep source order. Deterministic in seed.
Split split(const Panel& panel, double train_fraction, std::uint64_t seed);

/// before: periods starting strictly before `cutoff`; after: the rest.
/// Throws Error(cutoff_out_of_span) when cutoff lies outside
/// [first_period, last_period].
std::pair<Panel, Panel> split_by_date(const Panel& panel, Timestamp cutoff);

/// Header `region_id,period_start,period_kind,event_type,count,exposure,<feature>...`
std::string panel_to_csv(const Panel& panel);
Panel panel_from_csv(std::istream& in);

}  // namespace ember
