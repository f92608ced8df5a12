#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "ember/error.hpp"
#include "ember/log.hpp"
#include "ember/panel.hpp"

using namespace ember;

namespace {

Timestamp utc(const std::string& s) { return *parse_timestamp(s, TimeZone::utc()); }

EventRecord ev(const std::string& when, EventType t, const std::string& region) {
  return {"e", utc(when), t, std::nullopt, region};
}

const std::vector<EventType> kFR = {EventType::FR};

}  // namespace

TEST(Aggregate, ZeroFill) {
  const std::vector<std::string> regions = {"R1", "R2"};
  const TimeSpan span{utc("2011-01-03"), utc("2011-01-24")};
  const Panel p = aggregate({}, regions, PeriodKind::weekly, span, kFR);
  EXPECT_EQ(p.size(), 6u);
  for (const auto& o : p.observations) EXPECT_EQ(o.count, 0);
}

TEST(Aggregate, FiveEventsOneCell) {
  std::vector<EventRecord> e(5, ev("2011-01-05T12:00:00Z", EventType::FR, "R1"));
  const std::vector<std::string> regions = {"R1"};
  const Panel p = aggregate(e, regions, PeriodKind::weekly, {utc("2011-01-03"), utc("2011-01-10")}, kFR);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p.observations[0].count, 5);
}

TEST(Aggregate, WeekBoundaryByHand) {
  // 2011-01-09 is a Sunday; the next Monday starts a new week
  const std::vector<EventRecord> e = {ev("2011-01-09T23:59:00Z", EventType::FR, "R1"),
                                      ev("2011-01-10T00:00:00Z", EventType::FR, "R1")};
  const std::vector<std::string> regions = {"R1"};
  const Panel p = aggregate(e, regions, PeriodKind::weekly, {utc("2011-01-03"), utc("2011-01-17")}, kFR);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.observations[0].period_start, utc("2011-01-03"));
  EXPECT_EQ(p.observations[0].count, 1);
  EXPECT_EQ(p.observations[1].period_start, utc("2011-01-10"));
  EXPECT_EQ(p.observations[1].count, 1);
}

TEST(Aggregate, LocalCalendarWeeks) {
  // Sunday 23:30 in Edmonton is Monday 06:30 UTC, still the old local week
  const auto ed = TimeZone::named("America/Edmonton");
  const std::vector<EventRecord> e = {ev("2011-01-10T06:30:00Z", EventType::FR, "R1")};
  const std::vector<std::string> regions = {"R1"};
  const TimeSpan span{*parse_timestamp("2011-01-03", ed), *parse_timestamp("2011-01-17", ed)};
  const Panel p = aggregate(e, regions, PeriodKind::weekly, span, kFR, ed);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.observations[0].period_start, utc("2011-01-03T07:00:00Z"));
  EXPECT_EQ(p.observations[0].count, 1);
}

TEST(Aggregate, PartialPeriodsDroppedWithWarning) {
  log::ScopedCapture cap;
  const std::vector<std::string> regions = {"R1"};
  const Panel p = aggregate({}, regions, PeriodKind::weekly, {utc("2011-01-05"), utc("2011-01-20")}, kFR);
  EXPECT_EQ(p.size(), 1u);  // only the week of 2011-01-10 is whole
  EXPECT_FALSE(cap.messages().empty());
  try {
    aggregate({}, regions, PeriodKind::weekly, {utc("2011-01-05"), utc("2011-01-08")}, kFR);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_span);
  }
}

TEST(Aggregate, MonthsAndYearsAreCalendarAligned) {
  const std::vector<std::string> regions = {"R1"};
  const Panel m = aggregate({}, regions, PeriodKind::monthly, {utc("2019-11-01"), utc("2020-03-01")}, kFR);
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m.observations[3].period_start, utc("2020-02-01"));
  for (const auto& o : m.observations) EXPECT_EQ(o.exposure, 1.0);
  const Panel y = aggregate({}, regions, PeriodKind::yearly, {utc("2016-01-01"), utc("2018-01-01")}, kFR);
  EXPECT_EQ(y.size(), 2u);
  const Panel h = aggregate({}, regions, PeriodKind::hourly, {utc("2016-01-01"), utc("2016-01-02")}, kFR);
  EXPECT_EQ(h.size(), 24u);
}

TEST(Aggregate, ConservationAndMaterializationProperty) {
  std::mt19937_64 g(8);
  const std::vector<std::string> regions = {"A", "B", "C", "D"};
  const std::vector<EventType> types = {EventType::FR, EventType::MD};
  const TimeSpan span{utc("2012-01-02"), utc("2012-03-26")};  // 12 whole weeks
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EventRecord> e;
    std::size_t expected = 0;
    const long long lo = utc("2011-12-20").time_since_epoch().count(), hi = utc("2012-04-10").time_since_epoch().count();
    for (int i = 0; i < 500; ++i) {
      const Timestamp t{std::chrono::seconds{lo + static_cast<long long>(g() % static_cast<unsigned long long>(hi - lo))}};
      const std::string r = std::string(1, static_cast<char>('A' + g() % 6));  // E, F unknown
      const EventType ty = std::array{EventType::FR, EventType::MD, EventType::AL}[g() % 3];
      e.push_back({"x", t, ty, std::nullopt, r});
      if (t >= span.start && t < span.end && r < "E" && ty != EventType::AL) ++expected;
    }
    AggregateStats st;
    const Panel p = aggregate(e, regions, PeriodKind::weekly, span, types, TimeZone::utc(), &st);
    EXPECT_EQ(p.size(), regions.size() * 12 * types.size());
    std::int64_t total = 0;
    for (const auto& o : p.observations) total += o.count;
    EXPECT_EQ(static_cast<std::size_t>(total), expected);
    EXPECT_EQ(st.counted, expected);
    EXPECT_EQ(st.counted + st.outside_span + st.unknown_region + st.other_type, e.size());
  }
}

TEST(JoinFeatures, StaticCovariatesAndSubset) {
  const std::vector<std::string> regions = {"R1"};
  const Panel c = aggregate({}, regions, PeriodKind::weekly, {utc("2011-01-03"), utc("2011-01-17")}, kFR);
  const FeatureTable f({"R1", "R2"}, {"a", "b", "c"}, {1, 2, 3, 4, 5, 6});
  const Panel p = join_features(c, f);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.observations[0].x, p.observations[1].x);
  EXPECT_EQ(p.observations[0].x, (std::vector<double>{1, 2, 3}));
  const Panel s = join_features(c, f, {"c", "a"});
  EXPECT_EQ(s.feature_names, (std::vector<std::string>{"c", "a"}));
  EXPECT_EQ(s.observations[0].x, (std::vector<double>{3, 1}));
  try {
    join_features(c, FeatureTable({"R9"}, {"a"}, {1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_region_features);
    EXPECT_NE(std::string(e.what()).find("R1"), std::string::npos);
  }
  EXPECT_THROW(join_features(c, f, {"zz"}), Error);
}

namespace {

Panel synthetic(std::size_t n_regions, std::size_t n_weeks) {
  std::vector<std::string> regions;
  for (std::size_t i = 0; i < n_regions; ++i) regions.push_back("R" + std::to_string(i));
  const Timestamp s = utc("2011-01-03");
  return aggregate({}, regions, PeriodKind::weekly, {s, s + std::chrono::hours(24 * 7 * n_weeks)}, kFR);
}

std::set<std::pair<std::string, long long>> keys(const Panel& p) {
  std::set<std::pair<std::string, long long>> k;
  for (const auto& o : p.observations) k.insert({o.region_id, o.period_start.time_since_epoch().count()});
  return k;
}

}  // namespace

TEST(Split, SevenThreeDisjointDeterministic) {
  const Panel p = synthetic(2, 5);
  const Split a = split(p, 0.7, 42), b = split(p, 0.7, 42);
  EXPECT_EQ(a.train.size(), 7u);
  EXPECT_EQ(a.test.size(), 3u);
  EXPECT_EQ(keys(a.train), keys(b.train));
  auto all = keys(a.train);
  for (const auto& k : keys(a.test)) EXPECT_TRUE(all.insert(k).second);
  EXPECT_EQ(all, keys(p));
}

TEST(Split, CardinalityOverSeeds) {
  const Panel p = synthetic(2, 5);
  for (std::uint64_t seed = 0; seed < 100; ++seed) EXPECT_EQ(split(p, 0.7, seed).train.size(), 7u);
  const Panel q = synthetic(7, 13);
  for (double f : {0.1, 0.33, 0.5, 0.9}) {
    const Split s = split(q, f, 3);
    EXPECT_LE(std::fabs(static_cast<double>(s.train.size()) - f * q.size()), 1.0);
    EXPECT_EQ(s.train.size() + s.test.size(), q.size());
  }
}

TEST(SplitByDate, BoundaryAndErrors) {
  const std::vector<std::string> regions = {"R1"};
  const Panel m = aggregate({}, regions, PeriodKind::monthly, {utc("2019-11-01"), utc("2020-03-01")}, kFR);
  const auto [before, after] = split_by_date(m, utc("2020-01-01"));
  EXPECT_EQ(before.size(), 2u);
  EXPECT_EQ(after.size(), 2u);
  EXPECT_EQ(after.observations[0].period_start, utc("2020-01-01"));
  try {
    split_by_date(m, utc("2019-01-01"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::cutoff_out_of_span);
  }
}

TEST(PanelCsv, RoundTrip) {
  const std::vector<EventRecord> e = {ev("2011-01-05T12:00:00Z", EventType::FR, "R1")};
  const std::vector<std::string> regions = {"R1", "R2"};
  const Panel c = aggregate(e, regions, PeriodKind::weekly, {utc("2011-01-03"), utc("2011-01-17")}, kFR);
  const Panel p = join_features(c, FeatureTable({"R1", "R2"}, {"a"}, {0.25, 1e-7}));
  std::istringstream in(panel_to_csv(p));
  const Panel q = panel_from_csv(in);
  ASSERT_EQ(q.size(), p.size());
  EXPECT_EQ(q.feature_names, p.feature_names);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(q.observations[i].region_id, p.observations[i].region_id);
    EXPECT_EQ(q.observations[i].period_start, p.observations[i].period_start);
    EXPECT_EQ(q.observations[i].count, p.observations[i].count);
    EXPECT_EQ(q.observations[i].x, p.observations[i].x);
  }
}

TEST(Period, FloorAndNext) {
  using namespace std::chrono;
  const LocalTime t{utc("2016-03-16T15:45:00Z").time_since_epoch()};
  EXPECT_EQ(period_floor(t, PeriodKind::weekly).time_since_epoch(), utc("2016-03-14").time_since_epoch());
  EXPECT_EQ(period_floor(t, PeriodKind::monthly).time_since_epoch(), utc("2016-03-01").time_since_epoch());
  EXPECT_EQ(period_next(period_floor(t, PeriodKind::monthly), PeriodKind::monthly).time_since_epoch(),
            utc("2016-04-01").time_since_epoch());
  EXPECT_EQ(period_floor(t, PeriodKind::yearly).time_since_epoch(), utc("2016-01-01").time_since_epoch());
  EXPECT_EQ(parse_period_kind("hourly"), PeriodKind::hourly);
  EXPECT_FALSE(parse_period_kind("fortnightly"));
}
