#include "ember/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "ember/csv.hpp"
#include "ember/error.hpp"
#include "ember/geojson.hpp"
#include "ember/nb2.hpp"

namespace ember {

namespace {

constexpr std::uint64_t kFeatureKey = 0x46454154;  // stream tags
constexpr std::uint64_t kStationKey = 0x53544e;
constexpr std::uint64_t kCountKey = 0x434e54;

std::string region_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "R%04zu", i + 1);
  return buf;
}

std::string station_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%02zu", i + 1);
  return buf;
}

struct Grid {
  std::size_t cols;
  const ScenarioSpec& spec;
  LonLat corner(std::size_t i) const {
    return {spec.origin.lon + double(i % cols) * spec.cell_deg_lon, spec.origin.lat + double(i / cols) * spec.cell_deg_lat};
  }
};

}  // namespace

void validate(const ScenarioSpec& spec) {
  if (spec.n_regions == 0 || spec.n_periods == 0) throw Error(Errc::invalid_argument, "scenario needs regions and periods");
  if (!(spec.exposure > 0)) throw Error(Errc::invalid_argument, "exposure must be positive");
  if (spec.truths.empty()) throw Error(Errc::invalid_argument, "scenario has no event types");
  for (const auto& f : spec.features)
    if (!(f.lo >= 0 && f.hi >= f.lo)) throw Error(Errc::invalid_argument, "feature '" + f.name + "' has a bad range");
  for (const auto& t : spec.truths) {
    if (t.coefficients.size() != spec.features.size() + 1)
      throw Error(Errc::invalid_argument, "truth for " + std::string(to_string(t.type)) + " needs " +
                                              std::to_string(spec.features.size() + 1) + " coefficients");
    if (!(t.alpha >= 0)) throw Error(Errc::invalid_argument, "alpha must be non-negative");
  }
}

std::int64_t sample_nb2(double mu, double alpha, rng::Engine& g) {
  double lambda = mu;
  if (alpha > 0) {
    std::gamma_distribution<double> gamma(1 / alpha, alpha * mu);
    lambda = gamma(g);
  }
  if (!(lambda > 0)) return 0;
  std::poisson_distribution<std::int64_t> pois(lambda);
  return pois(g);
}

Scenario generate(const ScenarioSpec& spec) {
  validate(spec);
  const std::size_t R = spec.n_regions, P = spec.features.size();
  const auto cols = std::size_t(std::ceil(std::sqrt(double(R))));
  const Grid grid{cols, spec};

  Scenario sc;
  std::vector<std::string> ids, names;
  std::vector<double> values;
  for (const auto& f : spec.features) names.push_back(f.name);
  for (std::size_t r = 0; r < R; ++r) {
    ids.push_back(region_name(r));
    for (std::size_t k = 0; k < P; ++k) {
      auto g = rng::engine(spec.seed, {kFeatureKey, r, k});
      const auto& f = spec.features[k];
      values.push_back(f.lo + (f.hi - f.lo) * rng::uniform01(g));
    }
    const LonLat c = grid.corner(r);
    GeoPolygon poly;
    poly.outer = {c, {c.lon + spec.cell_deg_lon, c.lat}, {c.lon + spec.cell_deg_lon, c.lat + spec.cell_deg_lat},
                  {c.lon, c.lat + spec.cell_deg_lat}};
    sc.regions.push_back({ids.back(), {poly}});
  }
  sc.features = FeatureTable(ids, names, values);

  const std::size_t rows = (R + cols - 1) / cols;
  const std::size_t S = spec.n_stations ? spec.n_stations : std::max<std::size_t>(2, R / 10);
  for (std::size_t s = 0; s < S; ++s) {
    auto g = rng::engine(spec.seed, {kStationKey, s});
    const double u = rng::uniform01(g), v = rng::uniform01(g);
    sc.stations.stations.push_back(
        {station_name(s), {spec.origin.lon + u * double(cols) * spec.cell_deg_lon,
                           spec.origin.lat + v * double(rows) * spec.cell_deg_lat}});
  }

  std::vector<Timestamp> starts;
  LocalTime t = period_floor(LocalTime{spec.start.time_since_epoch()}, spec.period_kind);
  for (std::size_t q = 0; q <= spec.n_periods; ++q) {
    starts.push_back(Timestamp{t.time_since_epoch()});
    t = period_next(t, spec.period_kind);
  }
  sc.span = {starts.front(), starts.back()};

  Panel& panel = sc.panel;
  panel.feature_names = names;
  panel.period_kind = spec.period_kind;
  panel.first_period = starts.front();
  panel.last_period = starts[spec.n_periods - 1];
  std::size_t next_id = 1;
  for (std::size_t r = 0; r < R; ++r) {
    const auto row = sc.features.row(r);
    const LonLat corner = grid.corner(r);
    for (std::size_t q = 0; q < spec.n_periods; ++q) {
      const auto len = (starts[q + 1] - starts[q]).count();
      for (const auto& truth : spec.truths) {
        auto g = rng::engine(spec.seed, {kCountKey, r, q, std::uint64_t(truth.type)});
        const double mu = mean_mu(row, spec.exposure, truth.coefficients);
        const std::int64_t n = sample_nb2(mu, truth.alpha, g);
        Observation o;
        o.region_id = ids[r];
        o.period_start = starts[q];
        o.period_kind = spec.period_kind;
        o.exposure = spec.exposure;
        o.event_type = truth.type;
        o.count = n;
        o.x.assign(row.begin(), row.end());
        panel.observations.push_back(std::move(o));
        for (std::int64_t e = 0; e < n; ++e) {
          EventRecord ev;
          ev.event_id = "E" + std::to_string(next_id++);
          ev.dispatch_time = starts[q] + std::chrono::seconds{std::int64_t(rng::uniform_index(g, std::uint64_t(len)))};
          ev.event_type = truth.type;
          ev.location = LonLat{corner.lon + spec.cell_deg_lon * (0.001 + 0.998 * rng::uniform01(g)),
                               corner.lat + spec.cell_deg_lat * (0.001 + 0.998 * rng::uniform01(g))};
          ev.region_id = ids[r];
          sc.events.push_back(std::move(ev));
        }
      }
    }
  }
  return sc;
}

std::string truth_to_json(const ScenarioSpec& spec) {
  nlohmann::ordered_json j;
  j["seed"] = spec.seed;
  j["period_kind"] = std::string(to_string(spec.period_kind));
  j["n_regions"] = spec.n_regions;
  j["n_periods"] = spec.n_periods;
  j["exposure"] = spec.exposure;
  std::vector<std::string> names;
  for (const auto& f : spec.features) names.push_back(f.name);
  j["feature_names"] = names;
  auto& types = j["types"] = nlohmann::ordered_json::array();
  for (const auto& t : spec.truths)
    types.push_back({{"event_type", std::string(to_string(t.type))}, {"coefficients", t.coefficients}, {"alpha", t.alpha}});
  return j.dump(2) + "\n";
}

void write_scenario(const Scenario& sc, const ScenarioSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write_file_atomic(dir / "events.csv", write_events(sc.events));
  csv::write_file_atomic(dir / "features.csv", write_feature_table(sc.features));
  csv::write_file_atomic(dir / "stations.csv", write_stations(sc.stations));
  std::vector<geojson::Feature> feats;
  for (const auto& r : sc.regions) feats.push_back({r.polygon, {{"region_id", r.region_id}}});
  csv::write_file_atomic(dir / "regions.geojson", geojson::write_feature_collection(feats));
  csv::write_file_atomic(dir / "truth.json", truth_to_json(spec));

  nlohmann::ordered_json cfg;
  cfg["events"] = "events.csv";
  cfg["features"] = "features.csv";
  cfg["stations"] = "stations.csv";
  cfg["geometry"] = "regions.geojson";
  cfg["timezone"] = "UTC";
  cfg["period_kind"] = std::string(to_string(spec.period_kind));
  std::vector<std::string> types;
  for (const auto& t : spec.truths) types.emplace_back(to_string(t.type));
  cfg["event_types"] = types;
  cfg["span"] = {{"start", format_timestamp(sc.span.start)}, {"end", format_timestamp(sc.span.end)}};
  cfg["train_fraction"] = 0.7;
  cfg["seed"] = spec.seed;
  cfg["features_subset"] = "all";
  csv::write_file_atomic(dir / "config.json", cfg.dump(2) + "\n");
}

ScenarioSpec default_scenario(std::uint64_t seed) {
  ScenarioSpec s;
  s.seed = seed;
  s.n_regions = 100;
  s.n_periods = 50;
  s.features = {{"pop_density", 0, 3}, {"poi_density", 0, 3}};
  s.truths = {{EventType::FR, {1.0, 0.5, -0.25}, 0.5}, {EventType::MD, {1.5, 0.3, 0.1}, 0.3}};
  return s;
}

}  // namespace ember
