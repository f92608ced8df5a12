#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ember/evaluate.hpp"
#include "ember/feature_table.hpp"
#include "ember/importance.hpp"
#include "ember/ingest.hpp"
#include "ember/nb2.hpp"
#include "ember/panel.hpp"
#include "ember/projection.hpp"
#include "ember/spatial.hpp"
#include "run_config.hpp"

namespace ember::cli {

struct Needs {
  bool events = true;
  bool features = true;
};

/// Inputs mapped onto the configured granularity: for stations, events go to
/// the nearest station (or the station covering most of their region) and
/// neighborhood features are redistributed by overlap area.
struct Workspace {
  RunConfig cfg;
  TimeZone zone = TimeZone::utc();
  std::vector<EventRecord> events;
  std::optional<FeatureTable> features;
  std::vector<RegionGeometry> geometry;
  std::vector<std::string> regions;
  std::optional<TimeSpan> span;
  std::size_t rejected_rows = 0;
  std::size_t unassigned_events = 0;
};

Workspace load_workspace(const RunConfig& cfg, Needs needs);

TimeSpan resolve_span(const Workspace& ws, PeriodKind kind);

/// Counts for the configured types with every feature column attached.
Panel build_panel(const Workspace& ws, PeriodKind kind);

/// Station partition of the configured inputs, for the voronoi command.
struct StationLayout {
  LocalProjection projection{LonLat{}};
  VoronoiPartition partition;
  std::optional<OverlapMatrix> overlap;
};
StationLayout station_layout(const RunConfig& cfg);

/// Features the model for `type` uses: the explicit list, all columns, or
/// the importance selection on the training slice.
std::vector<std::string> model_features(const Workspace& ws, const Panel& train_slice, EventType type,
                                        ImportanceReport* report = nullptr);

struct TypeFit {
  EventType type;
  std::vector<std::string> features;
  Panel slice;
  Split split;
  Nb2Model model;
};

struct FitOutcome {
  std::vector<TypeFit> fits;
  std::vector<std::string> failures;  // "FR: message"
};

FitOutcome fit_types(const Workspace& ws, const Panel& panel);

/// Model-predicted mean per region (exposure 1).
std::vector<std::pair<std::string, double>> region_predictions(const Workspace& ws, const Nb2Model& model);

}  // namespace ember::cli
