#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <random>
#include <regex>
#include <thread>

#include <gtest/gtest.h>

#include "ember/csv.hpp"
#include "ember/error.hpp"
#include "ember/ingest.hpp"
#include "ember/log.hpp"
#include "ember/timeutil.hpp"

#include <httplib.h>
#undef HZ

using namespace ember;
namespace fs = std::filesystem;

namespace {

EventParseResult parse(const std::string& text, const TimeZone& zone = TimeZone::utc()) {
  std::istringstream in(text);
  return parse_events(in, {}, zone);
}

Timestamp utc(const std::string& s) { return *parse_timestamp(s, TimeZone::utc()); }

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ember-ingest-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kHeader = "event_id,dispatch_time,event_type,lon,lat,region_id\n";

}  // namespace

TEST(ParseEvents, WellFormedRowsKeepOrderAndTypes) {
  const auto r = parse(std::string(kHeader) +
                       "1,2016-01-04T10:00:00Z,FR,-113.5,53.5,\n"
                       "2,2016-01-04T11:00:00Z,MD,,,R01\n"
                       "3,2016-01-05T00:00:00Z,AL,-113.4,53.6,R02\n");
  ASSERT_TRUE(r.errors.empty());
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[0].event_type, EventType::FR);
  EXPECT_EQ(r.records[1].event_type, EventType::MD);
  EXPECT_EQ(r.records[2].event_type, EventType::AL);
  EXPECT_EQ(r.records[0].event_id, "1");
  EXPECT_TRUE(r.records[0].location.has_value());
  EXPECT_FALSE(r.records[0].region_id.has_value());
  EXPECT_EQ(*r.records[1].region_id, "R01");
  EXPECT_EQ(r.records[0].dispatch_time, utc("2016-01-04T10:00:00Z"));
}

TEST(ParseEvents, UnknownTypeReportsLine) {
  const auto r = parse(std::string(kHeader) + "1,2016-01-04T10:00:00Z,FR,,,R1\n2,2016-01-04T10:00:00Z,ZZ,,,R1\n");
  ASSERT_EQ(r.records.size(), 1u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].code, Errc::unknown_event_type);
  EXPECT_EQ(r.errors[0].line, 3u);
}

TEST(ParseEvents, ImpossibleDateIsMalformedTimestamp) {
  const auto r = parse(std::string(kHeader) + "1,2016-02-30T10:00:00Z,FR,,,R1\n");
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].code, Errc::malformed_timestamp);
}

TEST(ParseEvents, NoLocationNoRegionIsMissingLocation) {
  const auto r = parse(std::string(kHeader) + "1,2016-02-03T10:00:00Z,FR,,,\n");
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].code, Errc::missing_location);
}

TEST(ParseEvents, OutOfRangeCoordinate) {
  const auto r = parse(std::string(kHeader) + "1,2016-02-03T10:00:00Z,FR,-200,53,\n");
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].code, Errc::invalid_coordinate);
}

TEST(ParseEvents, MissingMappedColumnThrows) {
  std::istringstream in("event_id,event_type,lon,lat,region_id\n");
  try {
    parse_events(in, {}, TimeZone::utc());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_column);
  }
}

TEST(ParseEvents, ExtraColumnWarnsOnly) {
  log::ScopedCapture cap;
  const auto r = parse("event_id,dispatch_time,event_type,lon,lat,region_id,close_time\n1,2016-01-04T10:00:00Z,FR,,,R1,x\n");
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_TRUE(cap.contains("close_time"));
}

TEST(ParseEvents, LocalTimesUseConfiguredZone) {
  // Edmonton is UTC-7 in January
  const auto r = parse(std::string(kHeader) + "1,2016-01-04 10:00:00,FR,,,R1\n", TimeZone::named("America/Edmonton"));
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].dispatch_time, utc("2016-01-04T17:00:00Z"));
}

TEST(ParseEvents, TypeAliasesAndColumnMapping) {
  EventFormat f;
  f.id_column = "id";
  f.time_column = "when";
  f.type_column = "kind";
  f.lon_column = "";
  f.lat_column = "";
  f.region_column = "hood";
  f.type_aliases = {{"Fire", "FR"}};
  std::istringstream in("id,when,kind,hood\na,2016-01-04T10:00:00Z,Fire,N1\n");
  const auto r = parse_events(in, f, TimeZone::utc());
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].event_type, EventType::FR);
}

TEST(ParseEvents, TotalOverErrorEnumeration) {
  // property: every data row yields exactly one record or one error
  std::mt19937_64 g(3);
  const std::vector<std::string> times = {"2016-01-04T10:00:00Z", "2016-13-01T00:00:00Z", "junk", "2016-02-29"};
  const std::vector<std::string> types = {"FR", "MD", "ZZ", ""};
  const std::vector<std::string> locs = {"-113.5,53.5,", ",,R1", ",,", "abc,53,", "-113.5,53.5,R2"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string text = kHeader;
    const int rows = 1 + static_cast<int>(g() % 30);
    for (int i = 0; i < rows; ++i)
      text += std::to_string(i) + "," + times[g() % times.size()] + "," + types[g() % types.size()] + "," +
              locs[g() % locs.size()] + "\n";
    const auto r = parse(text);
    ASSERT_EQ(r.records.size() + r.errors.size(), static_cast<std::size_t>(rows));
  }
}

TEST(WriteEvents, RoundTrip) {
  const auto r = parse(std::string(kHeader) + "1,2016-01-04T10:00:00Z,FR,-113.5,53.5,\n2,2016-01-04T11:00:00Z,MD,,,R01\n");
  const auto again = parse(write_events(r.records));
  ASSERT_EQ(again.records.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(again.records[i].event_id, r.records[i].event_id);
    EXPECT_EQ(again.records[i].dispatch_time, r.records[i].dispatch_time);
    EXPECT_EQ(again.records[i].location, r.records[i].location);
    EXPECT_EQ(again.records[i].region_id, r.records[i].region_id);
  }
}

// ---- feature tables ---------------------------------------------------------

FeatureTable table(const std::string& text) {
  std::istringstream in(text);
  return parse_feature_table(in);
}

Errc table_error(const std::string& text) {
  try {
    table(text);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::invalid_argument;
}

TEST(FeatureTable, ZeroMatrix) {
  const auto t = table("region_id,a,b,c\nR1,0,0,0\nR2,0,0,0\n");
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  for (double v : t.values()) EXPECT_EQ(v, 0.0);
}

TEST(FeatureTable, Errors) {
  EXPECT_EQ(table_error("region_id,a\nR1,1\nR1,2\n"), Errc::duplicate_region);
  EXPECT_EQ(table_error("region_id,a\n"), Errc::empty_table);
  EXPECT_EQ(table_error("region_id,a\nR1,\n"), Errc::malformed_value);
  EXPECT_EQ(table_error("region_id,a\nR1,nan\n"), Errc::malformed_value);
}

TEST(FeatureTable, NegativeValueNamesCoordinates) {
  try {
    table("region_id,a,b\nR1,1,2\nR2,3,-4\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::negative_value);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("R2"), std::string::npos);
    EXPECT_NE(msg.find("b"), std::string::npos);
  }
}

TEST(FeatureTable, RoundTripProperty) {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t rows = 1 + g() % 20, cols = 1 + g() % 6;
    std::vector<std::string> ids, names;
    std::vector<double> vals;
    for (std::size_t r = 0; r < rows; ++r) ids.push_back("R," + std::to_string(r));  // needs quoting
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f\"" + std::to_string(c));
    for (std::size_t i = 0; i < rows * cols; ++i)
      vals.push_back(trial % 2 ? std::ldexp(static_cast<double>(g() % 100000), -static_cast<int>(g() % 40))
                               : static_cast<double>(g() % 50));
    const FeatureTable t(ids, names, vals);
    EXPECT_EQ(table(write_feature_table(t)), t);
  }
}

TEST(FeatureTable, SelectReorders) {
  const auto t = table("region_id,a,b,c\nR1,1,2,3\n");
  const auto s = t.select({"c", "a"});
  EXPECT_EQ(s.feature_names(), (std::vector<std::string>{"c", "a"}));
  EXPECT_EQ(s.at(0, 0), 3.0);
  EXPECT_EQ(s.at(0, 1), 1.0);
  EXPECT_THROW(t.select({"zz"}), Error);
}

// ---- stations and geometry --------------------------------------------------

TEST(Stations, ParseAndValidate) {
  std::istringstream ok("station_id,lon,lat\nS1,-113.5,53.5\nS2,-113.4,53.6\n");
  EXPECT_EQ(parse_stations(ok).stations.size(), 2u);
  auto code = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_stations(in);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::invalid_argument;
  };
  EXPECT_EQ(code("station_id,lon,lat\nS1,-113.5,53.5\nS1,-113.4,53.6\n"), Errc::duplicate_station);
  EXPECT_EQ(code("station_id,lon,lat\nS1,-113.5,53.5\nS2,-113.5,53.5\n"), Errc::duplicate_station_points);
  EXPECT_EQ(code("station_id,lon,lat\nS1,-113.5,95\n"), Errc::invalid_coordinate);
}

TEST(Geometry, ParsesAndNormalizesOrientation) {
  // clockwise exterior on input
  const std::string gj = R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"region_id":"A"},
    "geometry":{"type":"Polygon","coordinates":[[[0,0],[0,1],[1,1],[1,0],[0,0]]]}}]})";
  const auto g = parse_region_geometry(std::string_view(gj));
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].region_id, "A");
  const auto& ring = g[0].polygon[0].outer;
  double a = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& p = ring[i];
    const auto& q = ring[(i + 1) % ring.size()];
    a += p.lon * q.lat - q.lon * p.lat;
  }
  EXPECT_GT(a, 0);
}

TEST(Geometry, RejectsBadRings) {
  auto code = [](const std::string& coords) {
    const std::string gj = R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"region_id":"A"},
      "geometry":{"type":"Polygon","coordinates":)" + coords + "}}]}";
    try {
      parse_region_geometry(std::string_view(gj));
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io;
  };
  EXPECT_EQ(code("[[[0,0],[1,0],[1,1],[0,1]]]"), Errc::invalid_geometry);            // not closed
  EXPECT_EQ(code("[[[0,0],[1,1],[1,0],[0,1],[0,0]]]"), Errc::invalid_geometry);      // bow tie
  EXPECT_EQ(code("[[[0,0],[1,0],[2,0],[0,0]]]"), Errc::invalid_geometry);            // zero area
}

// ---- overpass ---------------------------------------------------------------

TEST(Overpass, FoodQueryHasAllSubTags) {
  const auto q = build_overpass_query("Food");
  for (const char* tag : {"bar", "cafe", "fast_food", "food_court", "pub", "restaurant"})
    EXPECT_TRUE(std::regex_search(q, std::regex(std::string("[\"(|]") + tag + "[\")|]"))) << tag;
}

TEST(Overpass, HealthcareAndDeterminism) {
  const auto q = build_overpass_query("Healthcare");
  EXPECT_NE(q.find("clinic"), std::string::npos);
  EXPECT_NE(q.find("hospital"), std::string::npos);
  for (const auto& c : overpass_categories()) EXPECT_EQ(build_overpass_query(c), build_overpass_query(c));
  EXPECT_EQ(overpass_categories().size(), 9u);
}

TEST(Overpass, UnknownCategory) {
  try {
    build_overpass_query("Gyms");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unknown_category);
  }
}

// ---- fetch against a local server -------------------------------------------

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Get("/ten", [](const httplib::Request&, httplib::Response& res) { res.set_content("0123456789", "text/plain"); });
    server_.Get("/missing", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
    server_.Post("/interpreter", [](const httplib::Request& req, httplib::Response& res) {
      res.set_content(R"({"query":")" + std::to_string(req.get_param_value("data").size()) + "\"}", "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(LocalServer, DisabledByDefault) {
  const auto dir = temp_dir("disabled");
  try {
    fetch_url_to_file(url("/ten"), dir / "x", NetworkPolicy{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::network_disabled);
  }
  EXPECT_FALSE(fs::exists(dir / "x"));
}

TEST_F(LocalServer, TenByteBody) {
  const auto dir = temp_dir("ten");
  NetworkPolicy p;
  p.allow = true;
  EXPECT_EQ(fetch_url_to_file(url("/ten"), dir / "x", p), 10u);
  EXPECT_EQ(fs::file_size(dir / "x"), 10u);
}

TEST_F(LocalServer, NotFoundCarriesStatus) {
  const auto dir = temp_dir("404");
  NetworkPolicy p;
  p.allow = true;
  try {
    fetch_url_to_file(url("/missing"), dir / "x", p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::http_status);
    EXPECT_EQ(e.detail(), 404);
  }
  EXPECT_FALSE(fs::exists(dir / "x"));
}

TEST_F(LocalServer, OverpassPostsQuery) {
  const auto dir = temp_dir("overpass");
  NetworkPolicy p;
  p.allow = true;
  const auto q = build_overpass_query("Food");
  fetch_overpass(url("/interpreter"), q, dir / "food.json", p);
  std::ifstream in(dir / "food.json");
  std::string body((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(body, R"({"query":")" + std::to_string(q.size()) + "\"}");
}

// ---- timestamps -------------------------------------------------------------

TEST(Timestamps, Forms) {
  const auto z = TimeZone::utc();
  EXPECT_EQ(parse_timestamp("2016-01-04T10:00:00Z", z), parse_timestamp("2016-01-04T03:00:00-07:00", z));
  EXPECT_EQ(parse_timestamp("2016-01-04", z), parse_timestamp("2016-01-04T00:00:00Z", z));
  EXPECT_EQ(parse_timestamp("2016-01-04T10:00:00.987Z", z), parse_timestamp("2016-01-04T10:00:00Z", z));
  EXPECT_FALSE(parse_timestamp("2016-01-04T25:00:00Z", z));
  EXPECT_FALSE(parse_timestamp("2015-02-29", z));
  EXPECT_TRUE(parse_timestamp("2016-02-29", z));
  EXPECT_EQ(format_timestamp(utc("2011-01-03T00:00:00Z")), "2011-01-03T00:00:00Z");
}

TEST(Timestamps, DaylightSavingShift) {
  const auto ed = TimeZone::named("America/Edmonton");
  // MDT (UTC-6) in July
  EXPECT_EQ(parse_timestamp("2016-07-04 10:00", ed), utc("2016-07-04T16:00:00Z"));
  EXPECT_THROW(TimeZone::named("Not/AZone"), Error);
}

TEST(Csv, QuotedFieldsAndNumbers) {
  std::istringstream in("a,\"b,\"\"c\"\"\"\r\n\n\"multi\nline\",2\n");
  const auto rows = csv::read_all(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].fields[1], "b,\"c\"");
  EXPECT_EQ(rows[1].fields[0], "multi\nline");
  EXPECT_EQ(csv::format_number(0.1), "0.1");
  EXPECT_EQ(*csv::parse_number(csv::format_number(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_FALSE(csv::parse_number("1.5x"));
}
