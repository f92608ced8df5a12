#include "pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ember/error.hpp"
#include "ember/log.hpp"
#include "ember/rng.hpp"

namespace ember::cli {

namespace {

struct Planar {
  LocalProjection projection;
  std::vector<PlanarRegion> regions;
  std::vector<Site> sites;
};

Planar project(const std::vector<RegionGeometry>& geometry, const StationSet* stations) {
  std::vector<LonLat> pts;
  for (const auto& g : geometry)
    for (const auto& poly : g.polygon) pts.insert(pts.end(), poly.outer.begin(), poly.outer.end());
  if (stations)
    for (const auto& s : stations->stations) pts.push_back(s.point);
  Planar p{fit_projection(pts), {}, {}};
  for (const auto& g : geometry) p.regions.push_back({g.region_id, p.projection.forward(g.polygon)});
  if (stations)
    for (const auto& s : stations->stations) p.sites.push_back({s.station_id, p.projection.forward(s.point)});
  return p;
}

MultiPolygon bbox_bounds(const Planar& p) {
  double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
  auto take = [&](Vec2 v) {
    lo_x = std::min(lo_x, v.x);
    lo_y = std::min(lo_y, v.y);
    hi_x = std::max(hi_x, v.x);
    hi_y = std::max(hi_y, v.y);
  };
  for (const auto& r : p.regions)
    for (const auto& poly : r.polygon)
      for (auto v : poly.outer) take(v);
  for (const auto& s : p.sites) take(s.point);
  if (p.regions.empty()) {
    // stations only: pad so boundary stations keep a cell of positive area
    const double pad = 0.05 * std::max(hi_x - lo_x, hi_y - lo_y) + 1.0;
    lo_x -= pad, lo_y -= pad, hi_x += pad, hi_y += pad;
  }
  Polygon box;
  box.outer = {{lo_x, lo_y}, {hi_x, lo_y}, {hi_x, hi_y}, {lo_x, hi_y}};
  return {box};
}

void require_path(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw Error(Errc::invalid_argument, std::string("no ") + what + " path configured");
  if (!std::filesystem::exists(p)) throw Error(Errc::io, std::string(what) + " file '" + p.string() + "' does not exist");
}

}  // namespace

StationLayout station_layout(const RunConfig& cfg) {
  require_path(cfg.stations, "stations");
  const StationSet stations = parse_stations(cfg.stations);
  std::vector<RegionGeometry> geometry;
  if (!cfg.geometry.empty()) {
    require_path(cfg.geometry, "geometry");
    geometry = parse_region_geometry(cfg.geometry);
  }
  Planar p = project(geometry, &stations);
  StationLayout layout;
  layout.projection = p.projection;
  layout.partition = voronoi(p.sites, bbox_bounds(p));
  if (!p.regions.empty()) layout.overlap = overlap_matrix(p.regions, layout.partition);
  return layout;
}

Workspace load_workspace(const RunConfig& cfg, Needs needs) {
  Workspace ws;
  ws.cfg = cfg;
  ws.zone = cfg.timezone == "UTC" ? TimeZone::utc() : TimeZone::named(cfg.timezone);

  if (needs.events) {
    require_path(cfg.events, "events");
    auto parsed = parse_events(cfg.events, cfg.event_format, ws.zone);
    ws.rejected_rows = parsed.errors.size();
    if (!parsed.errors.empty()) {
      log::warn("skipped " + std::to_string(parsed.errors.size()) + " malformed event rows; first: " +
                parsed.errors.front().message);
    }
    ws.events = std::move(parsed.records);
  }
  if (needs.features || cfg.granularity == Granularity::station) {
    require_path(cfg.features, "features");
    ws.features = parse_feature_table(cfg.features);
  }
  if (!cfg.geometry.empty()) {
    require_path(cfg.geometry, "geometry");
    ws.geometry = parse_region_geometry(cfg.geometry);
  }

  if (cfg.granularity == Granularity::neighborhood) {
    std::optional<Planar> planar;
    std::optional<RegionIndex> index;
    for (auto& e : ws.events) {
      if (e.region_id || !e.location) continue;
      if (ws.geometry.empty()) continue;
      if (!index) {
        planar = project(ws.geometry, nullptr);
        index.emplace(planar->regions);
      }
      e.region_id = index->assign(planar->projection.forward(*e.location));
    }
    if (ws.features) ws.regions = ws.features->region_ids();
    else if (!ws.geometry.empty())
      for (const auto& g : ws.geometry) ws.regions.push_back(g.region_id);
    else {
      std::set<std::string> seen;
      for (const auto& e : ws.events)
        if (e.region_id) seen.insert(*e.region_id);
      ws.regions.assign(seen.begin(), seen.end());
    }
  } else {
    require_path(cfg.stations, "stations");
    if (ws.geometry.empty())
      throw Error(Errc::invalid_argument, "station granularity needs neighborhood geometry for feature redistribution");
    const StationSet stations = parse_stations(cfg.stations);
    std::vector<RegionGeometry> modelled;
    for (const auto& g : ws.geometry)
      if (ws.features->region_index(g.region_id)) modelled.push_back(g);
    if (modelled.size() < ws.geometry.size())
      log::warn(std::to_string(ws.geometry.size() - modelled.size()) +
                " neighborhoods have geometry but no feature row; they are left out of the overlap");
    Planar p = project(modelled, &stations);
    const VoronoiPartition partition = voronoi(p.sites, bbox_bounds(p));
    const OverlapMatrix w = overlap_matrix(p.regions, partition);

    // region-only events follow the station holding most of the region
    std::map<std::string, std::string> dominant;
    for (std::size_t i = 0; i < w.row_ids.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < w.col_ids.size(); ++j)
        if (w.at(i, j) > w.at(i, best) || (w.at(i, j) == w.at(i, best) && w.col_ids[j] < w.col_ids[best])) best = j;
      dominant[w.row_ids[i]] = w.col_ids[best];
    }
    for (auto& e : ws.events) {
      if (e.location) {
        e.region_id = p.sites[nearest_site(p.projection.forward(*e.location), p.sites)].id;
      } else if (e.region_id) {
        auto it = dominant.find(*e.region_id);
        if (it != dominant.end()) e.region_id = it->second;
        else e.region_id.reset();
      }
    }
    if (ws.features) {
      // overlap rows cover the geometry; features may list a subset
      const FeatureTable full = *ws.features;
      ws.features = redistribute_features(full, w);
    }
    ws.geometry.clear();
    for (const auto& cell : partition.cells) ws.geometry.push_back({cell.station_id, p.projection.inverse(cell.polygon)});
    ws.regions = w.col_ids;
  }
  for (const auto& e : ws.events)
    if (!e.region_id) ++ws.unassigned_events;

  if (cfg.span_start && cfg.span_end) ws.span = TimeSpan{*cfg.span_start, *cfg.span_end};
  return ws;
}

TimeSpan resolve_span(const Workspace& ws, PeriodKind kind) {
  if (ws.span) return *ws.span;
  TimeSpan s = covering_span(ws.events, kind, ws.zone);
  if (ws.cfg.span_start) s.start = *ws.cfg.span_start;
  if (ws.cfg.span_end) s.end = *ws.cfg.span_end;
  return s;
}

Panel build_panel(const Workspace& ws, PeriodKind kind) {
  AggregateStats stats;
  Panel counts = aggregate(ws.events, ws.regions, kind, resolve_span(ws, kind), ws.cfg.event_types, ws.zone, &stats);
  if (stats.unknown_region > 0)
    log::warn(std::to_string(stats.unknown_region) + " events fall outside the modelled regions");
  if (!ws.features) return counts;
  return join_features(counts, *ws.features);
}

std::vector<std::string> model_features(const Workspace& ws, const Panel& train_slice, EventType type,
                                        ImportanceReport* report) {
  const auto& cfg = ws.cfg;
  if (cfg.feature_mode == "list") {
    for (const auto& f : cfg.feature_list)
      if (std::find(train_slice.feature_names.begin(), train_slice.feature_names.end(), f) ==
          train_slice.feature_names.end())
        throw Error(Errc::unknown_feature, "unknown feature '" + f + "'");
    return cfg.feature_list;
  }
  if (cfg.feature_mode == "all") return train_slice.feature_names;
  ForestConfig fc;
  fc.n_trees = cfg.n_trees;
  fc.seed = rng::derive(cfg.seed, {std::uint64_t(type)});
  fc.threads = cfg.threads;
  const Dataset data = importance_dataset(train_slice, type);
  const Forest forest = fit_forest(data, fc);
  ImportanceReport rep = permutation_importance(forest, data, cfg.importance_threshold);
  auto sel = select_features(rep, cfg.importance_threshold);
  if (report) *report = std::move(rep);
  return sel.features;
}

FitOutcome fit_types(const Workspace& ws, const Panel& panel) {
  FitOutcome out;
  for (EventType type : ws.cfg.event_types) {
    try {
      TypeFit f;
      f.type = type;
      f.slice = panel.slice(type);
      f.split = split(f.slice, ws.cfg.train_fraction, ws.cfg.seed);
      f.features = model_features(ws, f.split.train, type);
      f.model = fit_nb2(f.split.train, f.features);
      out.fits.push_back(std::move(f));
    } catch (const Error& e) {
      if (e.code() == Errc::unknown_feature || e.code() == Errc::invalid_argument) throw;
      out.failures.push_back(std::string(to_string(type)) + ": " + std::string(ember::to_string(e.code())) + ": " +
                             e.what());
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> region_predictions(const Workspace& ws, const Nb2Model& model) {
  if (!ws.features) throw Error(Errc::invalid_argument, "predictions need a feature table");
  const auto mu = predict(model, *ws.features, 1.0);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t r = 0; r < mu.size(); ++r) out.emplace_back(ws.features->region_ids()[r], mu[r]);
  return out;
}

}  // namespace ember::cli
