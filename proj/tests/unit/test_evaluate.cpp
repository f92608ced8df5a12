#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ember/error.hpp"
#include "ember/evaluate.hpp"
#include "ember/simulate.hpp"
#include "oracles.hpp"

using namespace ember;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io;
}

Timestamp utc(const std::string& s) { return *parse_timestamp(s, TimeZone::utc()); }

Panel counts_panel(const std::vector<std::pair<std::string, std::int64_t>>& cells) {
  Panel p;
  std::map<std::string, int> week;
  for (const auto& [r, c] : cells) {
    Observation o;
    o.region_id = r;
    o.period_start = utc("2011-01-03") + std::chrono::hours(24 * 7 * week[r]++);
    o.event_type = EventType::FR;
    o.count = c;
    p.observations.push_back(o);
  }
  return p;
}

ScenarioSpec single_type(std::uint64_t seed, std::size_t regions, std::size_t periods) {
  ScenarioSpec s = default_scenario(seed);
  s.n_regions = regions;
  s.n_periods = periods;
  s.truths = {{EventType::FR, {1.0, 0.5, -0.25}, 0.5}};
  return s;
}

}  // namespace

TEST(Metrics, HandExamples) {
  using V = std::vector<double>;
  EXPECT_EQ(mae(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_EQ(mae(V{0, 2}, V{1, 3}), 1.0);
  EXPECT_EQ(mae(V{0, 4}, V{2, 2}), 2.0);
  EXPECT_EQ(rmse(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_EQ(rmse(V{0, 4}, V{2, 2}), 2.0);
  EXPECT_EQ(rmse(V{0, 0, 3}, V{0, 0, 0}), std::sqrt(3.0));
  EXPECT_EQ(code_of([] { mae(V{1}, V{1, 2}); }), Errc::length_mismatch);
  EXPECT_EQ(code_of([] { rmse(V{}, V{}); }), Errc::empty);
}

TEST(Metrics, RmseDominatesAndOrderInvariant) {
  std::mt19937_64 g(1);
  std::normal_distribution<double> z;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + g() % 40;
    std::vector<double> y(n), h(n);
    for (std::size_t j = 0; j < n; ++j) y[j] = z(g), h[j] = z(g);
    const double m = mae(y, h), r = rmse(y, h);
    EXPECT_GE(r, m);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), g);
    std::vector<double> y2, h2, e;
    for (auto k : idx) y2.push_back(y[k]), h2.push_back(h[k]);
    EXPECT_NEAR(mae(y2, h2), m, 1e-12);
    EXPECT_NEAR(rmse(y2, h2), r, 1e-12);
    for (std::size_t k = 0; k < n; ++k) e.push_back(y[k] - h[k]);
    EXPECT_NEAR(m, oracle::mean_abs(e), 1e-12);
  }
}

TEST(EvaluateModel, ConstantZeroOnOnes) {
  Nb2Model zero;
  zero.coefficients = {-800};  // underflows to mu = 0
  const auto rep = evaluate_model(zero, counts_panel({{"A", 1}, {"B", 1}}));
  EXPECT_EQ(rep.mae_obs, 1.0);
  EXPECT_EQ(rep.rmse, 1.0);
  EXPECT_EQ(rep.n, 2u);
}

TEST(EvaluateModel, ExactRegionMeanHasZeroRegionError) {
  // intercept-only model on one region predicts that region's mean
  const Panel p = counts_panel({{"A", 1}, {"A", 3}, {"A", 2}});
  Nb2Model m;
  m.coefficients = {std::log(2.0)};
  const auto rep = evaluate_model(m, p);
  ASSERT_EQ(rep.per_region.size(), 1u);
  EXPECT_NEAR(rep.per_region[0].abs_error, 0.0, 1e-12);
  EXPECT_NEAR(rep.ae_region_mean, 0.0, 1e-12);
  EXPECT_NEAR(rep.mae_obs, 2.0 / 3.0, 1e-12);
}

TEST(EvaluateModel, ScoreEquationOnTrainingData) {
  const Panel p = counts_panel({{"A", 0}, {"A", 4}, {"B", 2}, {"B", 7}, {"C", 1}, {"C", 1}});
  const Nb2Model m = fit_nb2(p, {});
  double signed_sum = 0;
  const auto mu = predict(m, p);
  for (std::size_t i = 0; i < p.size(); ++i) signed_sum += static_cast<double>(p.observations[i].count) - mu[i];
  EXPECT_NEAR(signed_sum / static_cast<double>(p.size()), 0.0, 1e-6);
}

TEST(EvaluateModel, HeldOutMaeNearBayesOracle) {
  const ScenarioSpec spec = single_type(4, 100, 50);
  const Scenario sc = generate(spec);
  const Split s = split(sc.panel.slice(EventType::FR), 0.7, 4);
  const Nb2Model m = fit_nb2(s.train, s.train.feature_names);
  const auto rep = evaluate_model(m, s.test);

  // E|Y - mu| under the generating parameters, summed from the pmf
  const auto& truth = spec.truths[0];
  double bayes = 0;
  for (const auto& o : s.test.observations) {
    double eta = truth.coefficients[0];
    for (std::size_t k = 0; k < o.x.size(); ++k) eta += truth.coefficients[k + 1] * o.x[k];
    const double mu = std::exp(eta);
    double e = 0;
    for (std::int64_t y = 0; y < 400; ++y) e += oracle::nb2_pmf(y, mu, truth.alpha) * std::fabs(static_cast<double>(y) - mu);
    bayes += e;
  }
  bayes /= static_cast<double>(s.test.size());
  EXPECT_NEAR(rep.mae_obs, bayes, 0.1 * bayes);
}

TEST(ComparePeriods, IdenticalSidesSimilarRmse) {
  int close = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // default simulate size: 100 regions x 50 weeks, 25 weeks per side
    const Scenario sc = generate(single_type(100 + seed, 100, 50));
    const Panel slice = sc.panel.slice(EventType::FR);
    const Timestamp cut = slice.first_period + std::chrono::hours(24 * 7 * 25);
    CompareOptions o;
    o.seed = seed;
    const auto c = compare_periods(slice, cut, slice.feature_names, o);
    if (std::fabs(c.before.rmse - c.after.rmse) < 0.15 * c.before.rmse) ++close;
    EXPECT_EQ(c.per_region_delta.size(), 100u);
  }
  EXPECT_EQ(close, 20);
}

TEST(ComparePeriods, DoubledRateAfterCutoffRaisesError) {
  // the after side doubles counts in half the regions; features cannot explain it
  int worse = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scenario sc = generate(single_type(200 + seed, 40, 40));
    Panel slice = sc.panel.slice(EventType::FR);
    const Timestamp cut = slice.first_period + std::chrono::hours(24 * 7 * 20);
    const auto ids = slice.region_ids();
    std::set<std::string> doubled(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(ids.size() / 2));
    for (auto& o : slice.observations)
      if (o.period_start >= cut && doubled.count(o.region_id)) o.count *= 2;
    CompareOptions opt;
    opt.seed = seed;
    const auto c = compare_periods(slice, cut, slice.feature_names, opt);
    if (c.after.rmse > c.before.rmse) ++worse;
  }
  EXPECT_GE(worse, 18);
}

TEST(ComparePeriods, CutoffOutsideSpan) {
  const Scenario sc = generate(single_type(1, 10, 10));
  const Panel s = sc.panel.slice(EventType::FR);
  EXPECT_EQ(code_of([&] { compare_periods(s, utc("2030-01-01"), s.feature_names); }), Errc::cutoff_out_of_span);
}

TEST(ComparePeriods, SideErrorsArePrefixed) {
  // before-side cells are all zero: the intercept diverges
  Scenario sc = generate(single_type(1, 10, 10));
  Panel s = sc.panel.slice(EventType::FR);
  const Timestamp cut = s.first_period + std::chrono::hours(24 * 7 * 5);
  for (auto& o : s.observations)
    if (o.period_start < cut) o.count = 0;
  try {
    compare_periods(s, cut, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::separation_detected);
    EXPECT_EQ(std::string(e.what()).rfind("before: ", 0), 0u);
  }
}

TEST(Outputs, CsvShapes) {
  MetricReport r;
  r.event_type = EventType::MD;
  r.mae_obs = 0.5;
  r.rmse = 0.75;
  const std::vector<MetricsRow> rows = {{"all", "NB2 weekly", r}};
  EXPECT_EQ(metrics_to_csv(rows), "station,model,event_type,mae,rmse\nall,NB2 weekly,MD,0.5,0.75\n");
  PeriodComparison c;
  c.before = r;
  c.after = r;
  c.per_region_delta = {{"A", 1.0, std::nullopt}};
  EXPECT_EQ(region_delta_to_csv(c), "region_id,rmse_before,rmse_after\nA,1,NA\n");
}
