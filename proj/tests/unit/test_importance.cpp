#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "ember/error.hpp"
#include "ember/importance.hpp"
#include "ember/log.hpp"

using namespace ember;

namespace {

// y = 2 * [x0 > 0.5] + noise over p uniform columns; `copies` extra columns
// duplicate x0 exactly.
Dataset step_data(std::uint64_t seed, std::size_t n, std::size_t p, double noise = 1.0, std::size_t copies = 0,
                  bool signal = true) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, noise);
  Dataset d;
  for (std::size_t f = 0; f < p; ++f) d.feature_names.push_back("x" + std::to_string(f));
  for (std::size_t c = 0; c < copies; ++c) d.feature_names.push_back("copy" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) {
    double x0 = 0;
    for (std::size_t f = 0; f < p; ++f) {
      d.x.push_back(u(g));
      if (f == 0) x0 = d.x.back();
    }
    for (std::size_t c = 0; c < copies; ++c) d.x.push_back(x0);
    d.y.push_back((signal && x0 > 0.5 ? 2.0 : 0.0) + (noise > 0 ? z(g) : 0.0));
  }
  return d;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> r(d.n());
  std::iota(r.begin(), r.end(), 0);
  return r;
}

double score_of(const ImportanceReport& r, const std::string& f) {
  for (std::size_t i = 0; i < r.features.size(); ++i)
    if (r.features[i] == f) return r.scores[i];
  return -1;
}

ForestConfig small_forest(std::uint64_t seed, std::size_t trees = 100) {
  ForestConfig c;
  c.n_trees = trees;
  c.seed = seed;
  c.threads = 4;
  return c;
}

}  // namespace

TEST(FitTree, ConstantResponseIsOneLeaf) {
  Dataset d = step_data(1, 100, 3);
  std::fill(d.y.begin(), d.y.end(), 4.0);
  const Tree t = fit_tree(d, all_rows(d), ForestConfig{}, 5);
  EXPECT_EQ(t.leaves(), 1u);
  EXPECT_EQ(t.predict(d.row(0)), 4.0);
}

TEST(FitTree, StepSignalChosenAtRoot) {
  // every feature is a candidate at the root so the test sees the selection rule itself
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Dataset d = step_data(100 + s, 500, 6);
    ForestConfig c;
    c.mtry = 6;
    const Tree t = fit_tree(d, all_rows(d), c, s);
    ASSERT_GT(t.nodes.size(), 1u);
    if (t.nodes[0].feature == 0) ++hits;
    EXPECT_NEAR(t.nodes[0].threshold, 0.5, 0.05);
  }
  EXPECT_GE(hits, 19);
}

TEST(FitTree, TooFewRows) {
  const Dataset d = step_data(1, 9, 2);
  ForestConfig c;
  c.min_node = 5;
  try {
    fit_tree(d, all_rows(d), c, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::too_few_rows);
  }
}

TEST(FitTree, ChildrenRespectMinNode) {
  const Dataset d = step_data(3, 300, 4, 0.3);
  ForestConfig c;
  c.mtry = 4;
  c.min_node = 7;
  const Tree t = fit_tree(d, all_rows(d), c, 9);
  for (const auto& n : t.nodes) EXPECT_GE(n.n, 7u);
}

TEST(Importance, SinglePerfectFeatureScoresOne) {
  const Dataset d = step_data(5, 200, 1, 0.0);
  const auto r = permutation_importance(fit_forest(d, small_forest(1, 50)), d);
  ASSERT_EQ(r.scores.size(), 1u);
  EXPECT_EQ(r.scores[0], 1.0);
  EXPECT_EQ(r.selected, std::vector<std::string>{"x0"});
}

TEST(Importance, ExchangeableCopiesShare) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Dataset d = step_data(300 + s, 300, 1, 0.5, 1);
    const auto r = permutation_importance(fit_forest(d, small_forest(s)), d);
    EXPECT_NEAR(score_of(r, "x0"), 0.5, 0.15) << "seed " << s;
    EXPECT_NEAR(score_of(r, "copy0"), 0.5, 0.15) << "seed " << s;
  }
}

TEST(Importance, NoiseBesideSignalStaysLow) {
  int low = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Dataset d = step_data(500 + s, 300, 2);
    const auto r = permutation_importance(fit_forest(d, small_forest(s)), d);
    if (score_of(r, "x1") < 0.05) ++low;
  }
  EXPECT_GE(low, 19);
}

TEST(Importance, PermutedResponseBreaksImportance) {
  int ok = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Dataset d = step_data(700 + s, 300, 4);
    std::mt19937_64 g(s);
    std::shuffle(d.y.begin(), d.y.end(), g);
    const auto r = permutation_importance(fit_forest(d, small_forest(s)), d);
    if (std::all_of(r.scores.begin(), r.scores.end(), [](double v) { return v < 2.0 / 4 + 0.05; })) ++ok;
  }
  EXPECT_GE(ok, 19);
}

TEST(Importance, ThreadCountDoesNotChangeReport) {
  const Dataset d = step_data(9, 250, 5);
  ForestConfig one = small_forest(3, 60), many = one;
  one.threads = 1;
  many.threads = 7;
  const auto a = permutation_importance(fit_forest(d, one), d);
  const auto b = permutation_importance(fit_forest(d, many), d);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.raw, b.raw);
}

TEST(Importance, AffineRescaleKeepsRanking) {
  const Dataset d = step_data(13, 250, 4);
  Dataset e = d;
  for (std::size_t i = 0; i < e.n(); ++i) e.x[i * e.p() + 2] = 1000.0 * e.x[i * e.p() + 2] + 3.0;
  const auto a = permutation_importance(fit_forest(d, small_forest(2, 60)), d);
  const auto b = permutation_importance(fit_forest(e, small_forest(2, 60)), e);
  EXPECT_EQ(a.features, b.features);
}

TEST(Importance, OutOfBagRowsExcludeSample) {
  const Dataset d = step_data(1, 100, 2);
  const Forest f = fit_forest(d, small_forest(1, 10));
  ASSERT_EQ(f.out_of_bag.size(), 10u);
  for (const auto& oob : f.out_of_bag) EXPECT_EQ(oob.size(), 100u - 63u);
}

TEST(SelectFeatures, Rules) {
  ImportanceReport r;
  r.features = {"A", "B", "C"};
  r.scores = {0.6, 0.3, 0.04};
  EXPECT_EQ(select_features(r).features, (std::vector<std::string>{"A", "B"}));
  r.scores = {0.6, 0.05, 0.04};
  EXPECT_EQ(select_features(r).features, (std::vector<std::string>{"A", "B"}));
  r.scores = {0.04, 0.03, 0.02};
  log::ScopedCapture cap;
  const auto s = select_features(r);
  EXPECT_TRUE(s.fallback);
  EXPECT_EQ(s.features, std::vector<std::string>{"A"});
  EXPECT_FALSE(cap.messages().empty());
}

TEST(ImportanceDataset, RegionMeans) {
  Panel p;
  p.feature_names = {"f"};
  for (int r = 0; r < 2; ++r)
    for (int w = 0; w < 2; ++w) {
      Observation o;
      o.region_id = r ? "B" : "A";
      o.period_start = Timestamp{std::chrono::seconds{w * 604800}};
      o.event_type = EventType::FR;
      o.count = r * 10 + w;
      o.x = {static_cast<double>(r + 1)};
      p.observations.push_back(o);
    }
  const Dataset d = importance_dataset(p, EventType::FR);
  ASSERT_EQ(d.n(), 2u);
  EXPECT_EQ(d.y, (std::vector<double>{0.5, 10.5}));
  EXPECT_EQ(d.x, (std::vector<double>{1, 2}));
}

TEST(ImportanceOutput, CsvShape) {
  ImportanceReport r;
  r.features = {"A", "B"};
  r.scores = {0.75, 0.25};
  r.raw = {3, 1};
  r.selected = {"A", "B"};
  EXPECT_EQ(importance_to_csv(r), "feature,score,selected\nA,0.75,true\nB,0.25,true\n");
}
