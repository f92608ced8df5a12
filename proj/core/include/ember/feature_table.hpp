#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ember {

/// Region-by-feature matrix of non-negative covariates (demographics, PoI
/// counts). Row-major storage.
class FeatureTable {
 public:
  FeatureTable() = default;

  /// Validates the invariants: unique ids/names, values.size() == rows*cols,
  /// every value finite and >= 0. Throws Error.
  FeatureTable(std::vector<std::string> region_ids, std::vector<std::string> feature_names,
               std::vector<double> values);

  std::size_t rows() const { return region_ids_.size(); }
  std::size_t cols() const { return feature_names_.size(); }

  const std::vector<std::string>& region_ids() const { return region_ids_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t row, std::size_t col) const { return values_[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }
  std::vector<double> column(std::size_t c) const;

  std::optional<std::size_t> region_index(const std::string& id) const;
  std::optional<std::size_t> feature_index(const std::string& name) const;

  /// Columns reordered/subset by name. Throws Error(unknown_feature).
  FeatureTable select(const std::vector<std::string>& names) const;

  friend bool operator==(const FeatureTable&, const FeatureTable&) = default;

 private:
  std::vector<std::string> region_ids_;
  std::vector<std::string> feature_names_;
  std::vector<double> values_;
};

}  // namespace ember
