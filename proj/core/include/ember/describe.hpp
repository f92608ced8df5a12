#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ember/event_type.hpp"
#include "ember/panel.hpp"
#include "ember/timeutil.hpp"

namespace ember {

enum class DescribeLevel { city, region };
enum class StdDevKind { sample, population };

struct SeriesStats {
  double mean = 0;
  double stddev = 0;
  std::optional<double> cv;  // empty when mean == 0
  std::size_t n = 0;
};

/// Sample stddev uses n-1 (0 when n < 2). Throws Error(empty).
SeriesStats describe_series(std::span<const double> series, StdDevKind kind = StdDevKind::sample);

struct DescriptiveRow {
  EventType event_type;
  PeriodKind period_kind;
  double mean_mu = 0;
  double stddev_sigma = 0;
  std::optional<double> cv;
  std::size_t n_periods = 0;
};

/// City level sums counts over regions per period before taking moments;
/// region level uses every (region, period) cell. One row per event type in
/// panel order. Throws Error(empty).
std::vector<DescriptiveRow> describe(const Panel& panel, DescribeLevel level = DescribeLevel::city,
                                     StdDevKind kind = StdDevKind::sample);

/// Same moments as describe(aggregate(...)) without materializing the zero
/// cells, so hourly region-level statistics over years of data stay cheap.
/// Events outside `regions` or `span` are ignored. Throws Error(empty_span).
std::vector<DescriptiveRow> describe_events(std::span<const EventRecord> events, std::span<const std::string> regions,
                                            PeriodKind kind, TimeSpan span, std::span<const EventType> types,
                                            const TimeZone& zone, DescribeLevel level = DescribeLevel::city,
                                            StdDevKind sd = StdDevKind::sample);

/// `event_type,interval,mean,stddev,cv`; undefined CV is written as NA.
std::string describe_to_csv(const std::vector<DescriptiveRow>& rows);

/// Pearson correlation, clamped to [-1, 1]. Errors: LengthMismatch,
/// InvalidArgument (fewer than 2 points), ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

enum class CorrelationBasis {
  span_total,       // per-region feature vs per-region total count over the span
  per_observation,  // every cell's covariate vs its count
};

struct CorrelationMatrix {
  std::vector<std::string> feature_names;
  std::vector<EventType> event_types;
  std::vector<std::optional<double>> rho;  // feature-major; empty = undefined

  const std::optional<double>& at(std::size_t feature, std::size_t type) const {
    return rho[feature * event_types.size() + type];
  }
};

CorrelationMatrix correlation_matrix(const Panel& panel, CorrelationBasis basis = CorrelationBasis::span_total);

/// `feature,<TYPE>...`; values rounded to `decimals` when given, NA when
/// undefined.
std::string correlation_to_csv(const CorrelationMatrix& m, std::optional<int> decimals = std::nullopt);

/// Right-continuous empirical CDF over distinct sorted thresholds.
struct Ecdf {
  std::vector<double> thresholds;
  std::vector<double> cumulative;

  double operator()(double v) const;
};

/// Errors: Empty, InvalidArgument (negative or non-finite entry).
Ecdf residual_ecdf(std::span<const double> abs_errors);

std::string ecdf_to_csv(const Ecdf& f);

}  // namespace ember
