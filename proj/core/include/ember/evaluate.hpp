#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ember/geojson.hpp"
#include "ember/ingest.hpp"
#include "ember/nb2.hpp"
#include "ember/panel.hpp"

namespace ember {

/// Throws Error(length_mismatch) or Error(empty).
double mae(std::span<const double> y, std::span<const double> yhat);
double rmse(std::span<const double> y, std::span<const double> yhat);

struct RegionError {
  std::string region_id;
  double mean_predicted = 0;
  double mean_actual = 0;
  double abs_error = 0;  // |mean_predicted - mean_actual|
  double mae = 0;        // over the region's observations
  double rmse = 0;
  std::size_t n = 0;
};

struct MetricReport {
  std::optional<EventType> event_type;
  PeriodKind period_kind = PeriodKind::weekly;
  std::string granularity = "neighborhood";
  std::size_t n = 0;
  double mae_obs = 0;
  double rmse = 0;
  double ae_region_mean = 0;  // mean of per-region abs_error
  std::vector<RegionError> per_region;  // sorted by region id
};

MetricReport evaluate_model(const Nb2Model& model, const Panel& test, const std::string& granularity = "neighborhood");

/// |y - mu| per observation of `panel`.
std::vector<double> absolute_errors(const Nb2Model& model, const Panel& panel);

struct CompareOptions {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  FitOptions fit;
};

struct RegionDelta {
  std::string region_id;
  std::optional<double> rmse_before;
  std::optional<double> rmse_after;
};

struct PeriodComparison {
  Timestamp cutoff{};
  Nb2Model model_before;
  Nb2Model model_after;
  MetricReport before;
  MetricReport after;
  std::vector<RegionDelta> per_region_delta;  // sorted by region id
};

/// Splits a single-type panel at `cutoff`, then fits and evaluates each side
/// on its own train/test split (same seed). Errors from either side keep
/// their code and are prefixed with the side.
PeriodComparison compare_periods(const Panel& slice, Timestamp cutoff, const std::vector<std::string>& features,
                                 const CompareOptions& options = {});

struct MetricsRow {
  std::string station;  // region granularity label
  std::string model;    // e.g. "NB2 weekly"
  MetricReport report;
};

/// `station,model,event_type,mae,rmse`
std::string metrics_to_csv(std::span<const MetricsRow> rows);

/// `event_type,period_kind,mae_before,rmse_before,mae_after,rmse_after`
std::string comparison_to_csv(std::span<const PeriodComparison> rows);

/// `region_id,rmse_before,rmse_after` (NA where a side lacks the region)
std::string region_delta_to_csv(const PeriodComparison& cmp);

/// Regions with geometry, carrying `abs_error`, `mean_predicted`,
/// `mean_actual`.
std::string error_geojson(const MetricReport& report, std::span<const RegionGeometry> geometry,
                          const std::vector<std::pair<std::string, geojson::Value>>& metadata = {});

}  // namespace ember
