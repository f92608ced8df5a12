#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ember/geojson.hpp"
#include "ember/ingest.hpp"

namespace ember {

/// Within-class sum of squared deviations of sorted[first..last], computed
/// two-pass (mean, then deviations) with left-to-right sums.
double class_ssd(std::span<const double> sorted, std::size_t first, std::size_t last);

struct JenksResult {
  std::vector<double> breaks;        // k - 1 class upper values
  std::vector<std::size_t> ends;     // last sorted index of each class (k entries)
  double cost = 0;                   // class costs summed left to right
};

/// Fisher's exact optimal partition of the sorted values into k contiguous
/// classes. Among equal-cost partitions the one with the smallest first
/// break wins, then the second, and so on. Errors: TooFewValues (n < k),
/// InvalidArgument (k < 2 or non-finite input).
JenksResult jenks(std::span<const double> values, std::size_t k);
std::vector<double> jenks_breaks(std::span<const double> values, std::size_t k);

/// Low, Medium, High, Severe for k = 4; the top class is always Severe.
std::vector<std::string> default_risk_labels(std::size_t k);

struct RiskAssignment {
  std::string region_id;
  double value = 0;
  std::size_t class_index = 0;
};

struct RiskClassification {
  std::size_t k = 4;
  std::vector<double> breaks;
  std::vector<std::string> labels;
  std::vector<RiskAssignment> assignment;  // input order

  const std::string& label_of(const RiskAssignment& a) const { return labels[a.class_index]; }
};

/// Class of v under (-inf, b1], (b1, b2], ..., (b_{k-1}, inf).
std::size_t class_of(std::span<const double> breaks, double v);

RiskClassification classify_regions(const std::vector<std::pair<std::string, double>>& predictions, std::size_t k = 4,
                                    std::vector<std::string> labels = {});

/// `region_id,value,class`
std::string classification_to_csv(const RiskClassification& c);
/// Properties `region_id`, `risk_class`, `predicted_mean`.
std::string classification_geojson(const RiskClassification& c, std::span<const RegionGeometry> geometry,
                                   const std::vector<std::pair<std::string, geojson::Value>>& metadata = {});

}  // namespace ember
