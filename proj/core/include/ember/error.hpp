#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ember {

enum class Errc {
  invalid_argument,
  io,
  parse,
  // ingest
  unknown_event_type,
  malformed_timestamp,
  missing_location,
  invalid_coordinate,
  malformed_row,
  missing_column,
  malformed_value,
  negative_value,
  duplicate_region,
  duplicate_station,
  empty_table,
  invalid_geometry,
  unknown_category,
  network_disabled,
  http_status,
  // spatial
  extent_too_large,
  duplicate_station_points,
  degenerate_boundary,
  zero_area_neighborhood,
  region_mismatch,
  // panel
  empty_span,
  missing_region_features,
  unknown_feature,
  cutoff_out_of_span,
  // describe
  zero_variance,
  // importance
  too_few_rows,
  // nb2
  overflow,
  non_convergence,
  separation_detected,
  insufficient_data,
  feature_name_mismatch,
  schema_version,
  // evaluate
  length_mismatch,
  empty,
  // classify
  too_few_values,
};

std::string_view to_string(Errc code) noexcept;

/// Exception type for every failure surfaced by the library. `code()` is the
/// stable machine-readable kind; `what()` carries the human message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, long detail = 0)
      : std::runtime_error(message), code_(code), detail_(detail) {}

  Errc code() const noexcept { return code_; }
  /// Secondary integer payload: HTTP status for http_status, iteration count
  /// for non_convergence, line number for row-level parse failures.
  long detail() const noexcept { return detail_; }

 private:
  Errc code_;
  long detail_;
};

}  // namespace ember
