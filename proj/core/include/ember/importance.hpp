#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ember/event_type.hpp"
#include "ember/panel.hpp"

namespace ember {

struct ForestConfig {
  std::size_t n_trees = 1000;
  std::size_t mtry = 0;  // 0 selects ceil(p / 3)
  std::size_t min_node = 5;
  std::size_t n_permutations = 199;
  double alpha_stop = 0.05;
  std::uint64_t seed = 1;
  double sample_fraction = 0.632;
  /// Mean per-tree importance below `min_z` standard errors is treated as
  /// zero before normalization. 0 keeps every positive mean.
  double min_z = 3.0;
  unsigned threads = 1;
};

/// Dense regression data: row-major predictors and a numeric response.
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t n() const { return y.size(); }
  std::size_t p() const { return feature_names.size(); }
  double at(std::size_t row, std::size_t col) const { return x[row * p() + col]; }
  std::span<const double> row(std::size_t r) const { return {x.data() + r * p(), p()}; }
};

/// One row per region: static covariates against the region's mean count
/// per period for `type`.
Dataset importance_dataset(const Panel& panel, EventType type);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;
  std::size_t n = 0;
  double p_value = 1;
};

class Tree {
 public:
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const;
  bool uses(std::size_t feature) const;
  std::size_t leaves() const;
};

/// Grows one conditional inference tree on `rows`. At each node, mtry random
/// candidates are tested for association with the response by a
/// Monte-Carlo permutation test on |Pearson|; the smallest p-value wins
/// (ties: larger |correlation|, then draw order). Growth stops when that
/// p-value exceeds alpha_stop or the node holds fewer than 2 * min_node rows.
/// The split point maximizes the between-children sum of squares with at
/// least min_node rows per child. Throws Error(too_few_rows).
Tree fit_tree(const Dataset& data, std::span<const std::size_t> rows, const ForestConfig& config,
              std::uint64_t tree_seed);

struct Forest {
  std::vector<Tree> trees;
  std::vector<std::vector<std::size_t>> out_of_bag;
  ForestConfig config;
};

/// Subsamples without replacement per tree; tree t is seeded from
/// (config.seed, t) so results do not depend on the thread count.
Forest fit_forest(const Dataset& data, const ForestConfig& config);

struct ImportanceReport {
  std::vector<std::string> features;  // ranked, descending score, ties by name
  std::vector<double> scores;
  std::vector<double> raw;            // mean OOB MSE increase, same order
  double threshold = 0.05;
  std::vector<std::string> selected;  // score >= threshold, rank order
};

/// score(f) = mean over trees of (OOB MSE with f permuted - baseline OOB MSE);
/// negatives (and means under config.min_z standard errors) become 0, then
/// scores are scaled to sum to 1 when any is positive.
ImportanceReport permutation_importance(const Forest& forest, const Dataset& data, double threshold = 0.05);

struct FeatureSelection {
  std::vector<std::string> features;
  bool fallback = false;  // nothing cleared the threshold; top-1 returned
};

/// Features with score >= threshold in rank order; warns and returns the top
/// feature when none qualifies.
FeatureSelection select_features(const ImportanceReport& report, double threshold = 0.05);

/// `feature,score,selected`
std::string importance_to_csv(const ImportanceReport& report);
std::string importance_to_json(const ImportanceReport& report, const ForestConfig& config);

}  // namespace ember
