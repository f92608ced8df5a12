#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ember/describe.hpp"
#include "ember/error.hpp"

using namespace ember;

namespace {

Timestamp utc(const std::string& s) { return *parse_timestamp(s, TimeZone::utc()); }

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::io;
}

// Panel with the given per-(region, week) counts for FR.
Panel panel_of(const std::vector<std::vector<std::int64_t>>& counts, const std::vector<double>& feature = {}) {
  Panel p;
  p.period_kind = PeriodKind::weekly;
  if (!feature.empty()) p.feature_names = {"f"};
  for (std::size_t r = 0; r < counts.size(); ++r)
    for (std::size_t w = 0; w < counts[r].size(); ++w) {
      Observation o;
      o.region_id = "R" + std::to_string(r);
      o.period_start = utc("2011-01-03") + std::chrono::hours(24 * 7 * w);
      o.event_type = EventType::FR;
      o.count = counts[r][w];
      if (!feature.empty()) o.x = {feature[r]};
      p.observations.push_back(o);
    }
  return p;
}

}  // namespace

TEST(DescribeSeries, HandExamples) {
  const auto a = describe_series(std::vector<double>{2, 2, 2});
  EXPECT_EQ(a.mean, 2.0);
  EXPECT_EQ(a.stddev, 0.0);
  EXPECT_EQ(a.cv, 0.0);
  const auto b = describe_series(std::vector<double>{0, 4});
  EXPECT_DOUBLE_EQ(b.mean, 2.0);
  EXPECT_DOUBLE_EQ(b.stddev, 2 * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(*b.cv, std::sqrt(2.0));
  const auto pop = describe_series(std::vector<double>{0, 4}, StdDevKind::population);
  EXPECT_DOUBLE_EQ(pop.stddev, 2.0);
  const auto z = describe_series(std::vector<double>{0, 0, 0});
  EXPECT_EQ(z.mean, 0.0);
  EXPECT_FALSE(z.cv.has_value());
  EXPECT_EQ(code_of([] { describe_series(std::vector<double>{}); }), Errc::empty);
}

TEST(Describe, CityLevelSumsRegionsFirst) {
  const Panel p = panel_of({{1, 3}, {1, 5}});
  const auto city = describe(p, DescribeLevel::city);
  ASSERT_EQ(city.size(), 1u);
  EXPECT_DOUBLE_EQ(city[0].mean_mu, 5.0);  // periods: 2, 8
  EXPECT_DOUBLE_EQ(city[0].stddev_sigma, std::sqrt(18.0));
  EXPECT_EQ(city[0].n_periods, 2u);
  const auto reg = describe(p, DescribeLevel::region);
  EXPECT_DOUBLE_EQ(reg[0].mean_mu, 2.5);
}

TEST(Describe, ScalingProperty) {
  std::mt19937_64 g(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<std::int64_t>> c(3, std::vector<std::int64_t>(8));
    for (auto& r : c)
      for (auto& v : r) v = static_cast<std::int64_t>(g() % 20);
    const std::int64_t k = 2 + static_cast<std::int64_t>(g() % 5);
    auto ck = c;
    for (auto& r : ck)
      for (auto& v : r) v *= k;
    for (auto level : {DescribeLevel::city, DescribeLevel::region}) {
      const auto a = describe(panel_of(c), level)[0], b = describe(panel_of(ck), level)[0];
      EXPECT_NEAR(b.mean_mu, k * a.mean_mu, 1e-9 * b.mean_mu);
      EXPECT_NEAR(b.stddev_sigma, k * a.stddev_sigma, 1e-9 * (1 + b.stddev_sigma));
      if (a.cv) EXPECT_NEAR(*b.cv, *a.cv, 1e-12);
    }
  }
}

TEST(DescribeEvents, MatchesDenseDescribe) {
  std::mt19937_64 g(9);
  const std::vector<std::string> regions = {"A", "B", "C"};
  const std::vector<EventType> types = {EventType::FR, EventType::MD};
  const TimeSpan span{utc("2012-01-02"), utc("2012-02-27")};
  std::vector<EventRecord> e;
  for (int i = 0; i < 300; ++i) {
    const Timestamp t = span.start + std::chrono::seconds(static_cast<long long>(g() % (56ULL * 86400)));
    e.push_back({"x", t, i % 3 ? EventType::FR : EventType::MD, std::nullopt, regions[g() % 3]});
  }
  for (auto kind : {PeriodKind::daily, PeriodKind::weekly})
    for (auto level : {DescribeLevel::city, DescribeLevel::region}) {
      const auto dense = describe(aggregate(e, regions, kind, span, types), level);
      const auto sparse = describe_events(e, regions, kind, span, types, TimeZone::utc(), level);
      ASSERT_EQ(dense.size(), sparse.size());
      for (std::size_t i = 0; i < dense.size(); ++i) {
        EXPECT_EQ(dense[i].event_type, sparse[i].event_type);
        EXPECT_NEAR(dense[i].mean_mu, sparse[i].mean_mu, 1e-12);
        EXPECT_NEAR(dense[i].stddev_sigma, sparse[i].stddev_sigma, 1e-12);
        EXPECT_EQ(dense[i].n_periods, sparse[i].n_periods);
      }
    }
}

TEST(DescribeCsv, Shape) {
  const auto csv = describe_to_csv(describe(panel_of({{0, 0}})));
  EXPECT_EQ(csv, "event_type,interval,mean,stddev,cv\nFR,weekly,0,0,NA\n");
}

TEST(Pearson, Examples) {
  EXPECT_DOUBLE_EQ(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}), 1.0);
  EXPECT_DOUBLE_EQ(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0);
  EXPECT_EQ(code_of([] { pearson(std::vector<double>{1, 2, 3}, std::vector<double>{5, 5, 5}); }), Errc::zero_variance);
  EXPECT_EQ(code_of([] { pearson(std::vector<double>{1, 2}, std::vector<double>{5}); }), Errc::length_mismatch);
}

TEST(Pearson, AffineInvarianceProperty) {
  std::mt19937_64 g(10);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(30), y(30), xa(30), yn(30);
    const double a = std::exp(z(g)), b = 10 * z(g);
    for (int i = 0; i < 30; ++i) {
      x[i] = z(g);
      y[i] = x[i] + z(g);
      xa[i] = a * x[i] + b;
      yn[i] = -y[i];
    }
    const double r = pearson(x, y);
    EXPECT_NEAR(pearson(xa, y), r, 1e-12);
    EXPECT_NEAR(pearson(x, yn), -r, 1e-12);
  }
}

TEST(Correlation, IdenticalConstantAndIndependent) {
  // region totals 2, 6, 10 -> feature equal to the totals
  const Panel p = panel_of({{1, 1}, {3, 3}, {5, 5}}, {2, 6, 10});
  const auto m = correlation_matrix(p);
  ASSERT_TRUE(m.at(0, 0).has_value());
  EXPECT_NEAR(*m.at(0, 0), 1.0, 1e-15);
  const auto c = correlation_matrix(panel_of({{1, 1}, {3, 3}, {5, 5}}, {4, 4, 4}));
  EXPECT_FALSE(c.at(0, 0).has_value());
  EXPECT_EQ(correlation_to_csv(c), "feature,FR\nf,NA\n");

  // independent feature over 1000 regions: |rho| < 0.1 in (nearly) every seed
  int small = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 g(seed);
    std::poisson_distribution<int> pois(4.0);
    std::uniform_real_distribution<double> u(0, 10);
    std::vector<std::vector<std::int64_t>> counts(1000, std::vector<std::int64_t>(1));
    std::vector<double> f(1000);
    for (int r = 0; r < 1000; ++r) counts[r][0] = pois(g), f[r] = u(g);
    if (std::fabs(*correlation_matrix(panel_of(counts, f)).at(0, 0)) < 0.1) ++small;
  }
  EXPECT_GE(small, 99);
}

TEST(Ecdf, Examples) {
  const auto f = residual_ecdf(std::vector<double>{0, 0, 1, 2});
  EXPECT_EQ(f(0), 0.5);
  EXPECT_EQ(f(1), 0.75);
  EXPECT_EQ(f(2), 1.0);
  EXPECT_EQ(f(-1), 0.0);
  EXPECT_EQ(f(1.5), 0.75);
  EXPECT_EQ(residual_ecdf(std::vector<double>{0, 0, 0})(0), 1.0);
  EXPECT_EQ(residual_ecdf(std::vector<double>{3.5})(3.5), 1.0);
  EXPECT_EQ(code_of([] { residual_ecdf(std::vector<double>{}); }), Errc::empty);
  EXPECT_EQ(code_of([] { residual_ecdf(std::vector<double>{-1}); }), Errc::invalid_argument);
}

TEST(Ecdf, MonotoneAndBounded) {
  std::mt19937_64 g(2);
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(500);
  for (auto& x : v) x = std::floor(ex(g) * 4) / 4;
  const auto f = residual_ecdf(v);
  double prev = 0;
  for (double t = -1; t < 10; t += 0.01) {
    const double y = f(t);
    EXPECT_GE(y, prev);
    EXPECT_GE(y, 0.0);
    EXPECT_LE(y, 1.0);
    prev = y;
  }
  EXPECT_EQ(f.cumulative.back(), 1.0);
}
