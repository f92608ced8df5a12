#include "ember/error.hpp"

namespace ember {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::io: return "Io";
    case Errc::parse: return "Parse";
    case Errc::unknown_event_type: return "UnknownEventType";
    case Errc::malformed_timestamp: return "MalformedTimestamp";
    case Errc::missing_location: return "MissingLocation";
    case Errc::invalid_coordinate: return "InvalidCoordinate";
    case Errc::malformed_row: return "MalformedRow";
    case Errc::missing_column: return "MissingColumn";
    case Errc::malformed_value: return "MalformedValue";
    case Errc::negative_value: return "NegativeValue";
    case Errc::duplicate_region: return "DuplicateRegion";
    case Errc::duplicate_station: return "DuplicateStation";
    case Errc::empty_table: return "EmptyTable";
    case Errc::invalid_geometry: return "InvalidGeometry";
    case Errc::unknown_category: return "UnknownCategory";
    case Errc::network_disabled: return "NetworkDisabled";
    case Errc::http_status: return "HttpStatus";
    case Errc::extent_too_large: return "ExtentTooLarge";
    case Errc::duplicate_station_points: return "DuplicateStationPoints";
    case Errc::degenerate_boundary: return "DegenerateBoundary";
    case Errc::zero_area_neighborhood: return "ZeroAreaNeighborhood";
    case Errc::region_mismatch: return "RegionMismatch";
    case Errc::empty_span: return "EmptySpan";
    case Errc::missing_region_features: return "MissingRegionFeatures";
    case Errc::unknown_feature: return "UnknownFeature";
    case Errc::cutoff_out_of_span: return "CutoffOutOfSpan";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::too_few_rows: return "TooFewRows";
    case Errc::overflow: return "Overflow";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::separation_detected: return "SeparationDetected";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::feature_name_mismatch: return "FeatureNameMismatch";
    case Errc::schema_version: return "SchemaVersion";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::empty: return "Empty";
    case Errc::too_few_values: return "TooFewValues";
  }
  return "Unknown";
}

}  // namespace ember
