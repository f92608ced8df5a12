#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ember/classify.hpp"
#include "ember/csv.hpp"
#include "ember/describe.hpp"
#include "ember/error.hpp"
#include "ember/evaluate.hpp"
#include "ember/geojson.hpp"
#include "ember/importance.hpp"
#include "ember/log.hpp"
#include "ember/simulate.hpp"
#include "pipeline.hpp"
#include "run_config.hpp"

namespace ember::cli {

namespace {

namespace fs = std::filesystem;

// Flags shared by every subcommand; applied over the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string period;
  std::string types;
  std::string granularity;
  std::string features;
  bool allow_network = false;
  std::string out;
  std::string events, feature_table, stations, geometry, timezone;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--seed", c.seed, "master random seed");
  app->add_option("--period", c.period, "hourly|daily|weekly|monthly|yearly")
      ->check(CLI::IsMember({"hourly", "daily", "weekly", "monthly", "yearly"}));
  app->add_option("--types", c.types, "event type codes, e.g. FR,MD");
  app->add_option("--granularity", c.granularity, "neighborhood|station")
      ->check(CLI::IsMember({"neighborhood", "station"}));
  app->add_option("--features", c.features, "auto, all, or a comma-separated feature list");
  app->add_flag("--allow-network", c.allow_network, "permit network access");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--events", c.events, "events CSV");
  app->add_option("--feature-table", c.feature_table, "region feature CSV");
  app->add_option("--stations", c.stations, "stations CSV");
  app->add_option("--geometry", c.geometry, "region GeoJSON");
  app->add_option("--timezone", c.timezone, "IANA zone for offset-less timestamps");
}

RunConfig effective_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.period.empty()) cfg.period_kind = *parse_period_kind(c.period);
  if (!c.types.empty()) cfg.event_types = parse_event_type_list(c.types);
  if (c.granularity == "station") cfg.granularity = Granularity::station;
  if (c.granularity == "neighborhood") cfg.granularity = Granularity::neighborhood;
  if (!c.features.empty()) set_feature_spec(cfg, c.features);
  if (c.allow_network) cfg.allow_network = true;
  if (!c.out.empty()) cfg.out = c.out;
  if (!c.events.empty()) cfg.events = c.events;
  if (!c.feature_table.empty()) cfg.features = c.feature_table;
  if (!c.stations.empty()) cfg.stations = c.stations;
  if (!c.geometry.empty()) cfg.geometry = c.geometry;
  if (!c.timezone.empty()) cfg.timezone = c.timezone;
  return cfg;
}

// Collects artifacts for one command and writes the metadata sidecar.
class Outputs {
 public:
  Outputs(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    fs::create_directories(cfg.out);
  }

  void write(const std::string& name, std::string_view text) {
    const fs::path p = cfg_.out / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    csv::write_file_atomic(p, text);
    names_.insert(name);
  }

  std::vector<std::pair<std::string, geojson::Value>> geo_metadata() const {
    return {{"tool", std::string("ember")},
            {"version", std::string(kToolVersion)},
            {"seed", static_cast<long long>(cfg_.seed)},
            {"config_hash", config_hash(cfg_)}};
  }

  void finish(const std::vector<std::string>& failures = {}) {
    nlohmann::ordered_json j;
    j["tool"] = "ember";
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["seed"] = cfg_.seed;
    j["config_hash"] = config_hash(cfg_);
    j["outputs"] = std::vector<std::string>(names_.begin(), names_.end());
    if (!failures.empty()) j["failures"] = failures;
    csv::write_file_atomic(cfg_.out / (command_ + ".metadata.json"), j.dump(2) + "\n");
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::set<std::string> names_;
};

std::string type_name(EventType t) { return std::string(to_string(t)); }
std::string kind_name(PeriodKind k) { return std::string(to_string(k)); }

int report_failures(std::ostream& err, const std::vector<std::string>& failures) {
  for (const auto& f : failures) err << "error: " << f << "\n";
  return failures.empty() ? 0 : 1;
}

// ---- commands --------------------------------------------------------------

int cmd_describe(const RunConfig& cfg, std::ostream& out) {
  Workspace ws = load_workspace(cfg, {.events = true, .features = false});
  Outputs o(cfg, "describe");
  std::vector<DescriptiveRow> city, region;
  for (PeriodKind k : {PeriodKind::hourly, PeriodKind::daily, PeriodKind::weekly, PeriodKind::monthly,
                       PeriodKind::yearly}) {
    TimeSpan span;
    try {
      span = resolve_span(ws, k);
      auto c = describe_events(ws.events, ws.regions, k, span, cfg.event_types, ws.zone, DescribeLevel::city);
      auto r = describe_events(ws.events, ws.regions, k, span, cfg.event_types, ws.zone, DescribeLevel::region);
      city.insert(city.end(), c.begin(), c.end());
      region.insert(region.end(), r.begin(), r.end());
    } catch (const Error& e) {
      if (e.code() != Errc::empty_span) throw;
      log::warn("describe: no full " + kind_name(k) + " period in the data span");
    }
  }
  auto by_type = [](const DescriptiveRow& a, const DescriptiveRow& b) {
    if (a.event_type != b.event_type) return a.event_type < b.event_type;
    return a.period_kind < b.period_kind;
  };
  std::stable_sort(city.begin(), city.end(), by_type);
  std::stable_sort(region.begin(), region.end(), by_type);
  o.write("describe_city.csv", describe_to_csv(city));
  o.write("describe_region.csv", describe_to_csv(region));
  o.finish();
  for (const auto& r : city)
    out << type_name(r.event_type) << " " << kind_name(r.period_kind) << " mean=" << csv::format_number(r.mean_mu)
        << " sd=" << csv::format_number(r.stddev_sigma) << "\n";
  return 0;
}

int cmd_correlate(const RunConfig& cfg, std::ostream& out) {
  Workspace ws = load_workspace(cfg, {});
  const Panel panel = build_panel(ws, cfg.period_kind);
  const auto m = correlation_matrix(panel);
  Outputs o(cfg, "correlate");
  o.write("correlation.csv", correlation_to_csv(m));
  o.finish();
  out << "correlation matrix: " << m.feature_names.size() << " features x " << m.event_types.size() << " types\n";
  return 0;
}

int cmd_importance(const RunConfig& cfg, std::ostream& out) {
  Workspace ws = load_workspace(cfg, {});
  const Panel panel = build_panel(ws, cfg.period_kind);
  Outputs o(cfg, "importance");
  nlohmann::ordered_json selected;
  for (EventType t : cfg.event_types) {
    ForestConfig fc;
    fc.n_trees = cfg.n_trees;
    fc.seed = rng::derive(cfg.seed, {std::uint64_t(t)});
    fc.threads = cfg.threads;
    const Dataset data = importance_dataset(panel, t);
    const Forest forest = fit_forest(data, fc);
    const ImportanceReport rep = permutation_importance(forest, data, cfg.importance_threshold);
    const auto sel = select_features(rep, cfg.importance_threshold);
    o.write("importance_" + type_name(t) + ".csv", importance_to_csv(rep));
    o.write("importance_" + type_name(t) + ".json", importance_to_json(rep, fc));
    selected[type_name(t)] = sel.features;
    out << type_name(t) << ":";
    for (const auto& f : sel.features) out << " " << f;
    out << (sel.fallback ? " (fallback)" : "") << "\n";
  }
  o.write("selected_features.json", selected.dump(2) + "\n");
  o.finish();
  return 0;
}

int cmd_voronoi(const RunConfig& cfg, std::ostream& out) {
  const StationLayout layout = station_layout(cfg);
  Outputs o(cfg, "voronoi");
  o.write("voronoi.geojson", partition_to_geojson(layout.partition, layout.projection, o.geo_metadata()));
  if (layout.overlap) {
    o.write("overlap.csv", overlap_to_csv(*layout.overlap));
    if (!cfg.features.empty()) {
      const FeatureTable table = parse_feature_table(cfg.features);
      o.write("station_features.csv", write_feature_table(redistribute_features(table, *layout.overlap)));
    }
  }
  o.finish();
  out << layout.partition.cells.size() << " station cells\n";
  return 0;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Workspace ws = load_workspace(cfg, {});
  const Panel panel = build_panel(ws, cfg.period_kind);
  const FitOutcome res = fit_types(ws, panel);
  Outputs o(cfg, "fit");
  for (const auto& f : res.fits) {
    o.write("models/" + type_name(f.type) + "_" + kind_name(cfg.period_kind) + ".json", model_to_json(f.model));
    out << type_name(f.type) << " alpha=" << csv::format_number(f.model.alpha)
        << " loglik=" << csv::format_number(f.model.diagnostics.log_likelihood)
        << " iterations=" << f.model.diagnostics.iterations << "\n";
  }
  o.finish(res.failures);
  return report_failures(err, res.failures);
}

int cmd_predict(const RunConfig& cfg, const std::string& models_dir, std::ostream& out, std::ostream& err) {
  Workspace ws = load_workspace(cfg, {.events = false, .features = true});
  const fs::path dir = models_dir.empty() ? cfg.out / "models" : fs::path(models_dir);
  Outputs o(cfg, "predict");
  std::vector<std::string> failures;
  for (EventType t : cfg.event_types) {
    const fs::path p = dir / (type_name(t) + "_" + kind_name(cfg.period_kind) + ".json");
    if (!fs::exists(p)) {
      failures.push_back(type_name(t) + ": no model at " + p.string());
      continue;
    }
    const Nb2Model model = read_model(p);
    const auto pred = region_predictions(ws, model);
    std::string text = "region_id,predicted_mean\n";
    for (const auto& [id, v] : pred) text += csv::join({id, csv::format_number(v)}) + "\n";
    o.write("predictions_" + type_name(t) + ".csv", text);
    if (!ws.geometry.empty()) {
      std::map<std::string, double> by_id(pred.begin(), pred.end());
      std::vector<geojson::Feature> feats;
      for (const auto& g : ws.geometry)
        if (auto it = by_id.find(g.region_id); it != by_id.end())
          feats.push_back({g.polygon, {{"region_id", g.region_id}, {"predicted_mean", it->second}}});
      o.write("predictions_" + type_name(t) + ".geojson", geojson::write_feature_collection(feats, o.geo_metadata()));
    }
    out << type_name(t) << ": " << pred.size() << " regions\n";
  }
  o.finish(failures);
  return report_failures(err, failures);
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Workspace ws = load_workspace(cfg, {});
  const Panel panel = build_panel(ws, cfg.period_kind);
  const FitOutcome res = fit_types(ws, panel);
  Outputs o(cfg, "evaluate");
  std::vector<MetricsRow> rows;
  const std::string model_label = "NB2 " + kind_name(cfg.period_kind);
  for (const auto& f : res.fits) {
    const MetricReport rep = evaluate_model(f.model, f.split.test, std::string(to_string(cfg.granularity)));
    rows.push_back({"all", model_label, rep});
    if (cfg.granularity == Granularity::station) {
      for (const auto& r : rep.per_region) {
        MetricReport one = rep;
        one.mae_obs = r.mae;
        one.rmse = r.rmse;
        one.per_region.clear();
        rows.push_back({r.region_id, model_label, one});
      }
    }
    std::string per = "region_id,mean_predicted,mean_actual,abs_error,mae,rmse\n";
    for (const auto& r : rep.per_region)
      per += csv::join({r.region_id, csv::format_number(r.mean_predicted), csv::format_number(r.mean_actual),
                        csv::format_number(r.abs_error), csv::format_number(r.mae), csv::format_number(r.rmse)}) +
             "\n";
    o.write("evaluation_" + type_name(f.type) + ".csv", per);
    o.write("ecdf_" + type_name(f.type) + ".csv", ecdf_to_csv(residual_ecdf(absolute_errors(f.model, f.split.test))));
    if (!ws.geometry.empty())
      o.write("errors_" + type_name(f.type) + ".geojson", error_geojson(rep, ws.geometry, o.geo_metadata()));
    o.write("models/" + type_name(f.type) + "_" + kind_name(cfg.period_kind) + ".json", model_to_json(f.model));
    out << type_name(f.type) << " mae=" << csv::format_number(rep.mae_obs) << " rmse=" << csv::format_number(rep.rmse)
        << " ae_region_mean=" << csv::format_number(rep.ae_region_mean) << "\n";
  }
  o.write("metrics.csv", metrics_to_csv(rows));
  o.finish(res.failures);
  return report_failures(err, res.failures);
}

int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Workspace ws = load_workspace(cfg, {});
  const Panel panel = build_panel(ws, cfg.period_kind);
  const FitOutcome res = fit_types(ws, panel);
  Outputs o(cfg, "classify");
  for (const auto& f : res.fits) {
    const RiskClassification c = classify_regions(region_predictions(ws, f.model), cfg.classes);
    o.write("classification_" + type_name(f.type) + ".csv", classification_to_csv(c));
    if (!ws.geometry.empty())
      o.write("classification_" + type_name(f.type) + ".geojson",
              classification_geojson(c, ws.geometry, o.geo_metadata()));
    out << type_name(f.type) << " breaks:";
    for (double b : c.breaks) out << " " << csv::format_number(b);
    out << "\n";
  }
  o.finish(res.failures);
  return report_failures(err, res.failures);
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.cutoff) throw Error(Errc::invalid_argument, "compare-periods needs --cutoff or a cutoff config key");
  Workspace ws = load_workspace(cfg, {});
  const Panel panel = build_panel(ws, cfg.period_kind);
  Outputs o(cfg, "compare-periods");
  std::vector<PeriodComparison> rows;
  std::vector<std::string> failures;
  for (EventType t : cfg.event_types) {
    const Panel slice = panel.slice(t);
    std::vector<std::string> features;
    if (cfg.feature_mode == "list") features = model_features(ws, slice, t);
    else features = slice.feature_names;
    try {
      CompareOptions opt;
      opt.train_fraction = cfg.train_fraction;
      opt.seed = cfg.seed;
      PeriodComparison c = compare_periods(slice, *cfg.cutoff, features, opt);
      o.write("region_delta_" + type_name(t) + ".csv", region_delta_to_csv(c));
      out << type_name(t) << " rmse_before=" << csv::format_number(c.before.rmse)
          << " rmse_after=" << csv::format_number(c.after.rmse) << "\n";
      rows.push_back(std::move(c));
    } catch (const Error& e) {
      if (e.code() == Errc::cutoff_out_of_span) throw;
      failures.push_back(type_name(t) + ": " + std::string(to_string(e.code())) + ": " + e.what());
    }
  }
  o.write("comparison.csv", comparison_to_csv(rows));
  o.finish(failures);
  return report_failures(err, failures);
}

int cmd_simulate(const RunConfig& cfg, std::size_t regions, std::size_t periods, std::ostream& out) {
  ScenarioSpec spec = default_scenario(cfg.seed);
  if (regions) spec.n_regions = regions;
  if (periods) spec.n_periods = periods;
  spec.period_kind = cfg.period_kind;
  const Scenario sc = generate(spec);
  write_scenario(sc, spec, cfg.out);
  out << "wrote " << sc.events.size() << " events for " << spec.n_regions << " regions to "
      << cfg.out.generic_string() << "\n";
  return 0;
}

int cmd_fetch(const RunConfig& cfg, const std::string& url, const std::string& category, const std::string& area,
              const std::string& endpoint, const std::string& dest, bool print_query, std::ostream& out) {
  if (url.empty() == category.empty()) throw Error(Errc::invalid_argument, "fetch needs exactly one of --url or --overpass");
  NetworkPolicy policy;
  policy.allow = cfg.allow_network;
  if (!category.empty()) {
    const std::string q = build_overpass_query(category, area);
    if (print_query) {
      out << q;
      return 0;
    }
    if (dest.empty()) throw Error(Errc::invalid_argument, "fetch needs --dest");
    const auto n = fetch_overpass(endpoint, q, dest, policy);
    out << "wrote " << n << " bytes to " << dest << "\n";
    return 0;
  }
  if (dest.empty()) throw Error(Errc::invalid_argument, "fetch needs --dest");
  const auto n = fetch_url_to_file(url, dest, policy);
  out << "wrote " << n << " bytes to " << dest << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ember: emergency event risk modelling", "ember"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  Common common;
  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<const char*, const char*>> names = {
      {"describe", "descriptive statistics per event type and interval"},
      {"correlate", "feature/event correlation matrix"},
      {"importance", "forest-based feature importance per event type"},
      {"voronoi", "station service areas and overlap weights"},
      {"fit", "fit NB2 models"},
      {"predict", "per-region predictions from fitted models"},
      {"evaluate", "fit, then score on the held-out split"},
      {"classify", "risk classes from predicted means"},
      {"compare-periods", "before/after evaluation around a cutoff date"},
      {"simulate", "generate a synthetic city"},
      {"fetch", "download remote inputs (needs --allow-network)"}};
  for (const auto& [name, help] : names) {
    auto* s = app.add_subcommand(name, help);
    add_common(s, common);
    subs[name] = s;
  }
  std::string models_dir;
  subs["predict"]->add_option("--models", models_dir, "directory of model JSON files (default <out>/models)");
  std::string cutoff;
  subs["compare-periods"]->add_option("--cutoff", cutoff, "first instant of the after period (RFC 3339 or date)");
  std::size_t sim_regions = 0, sim_periods = 0;
  subs["simulate"]->add_option("--regions", sim_regions, "number of regions");
  subs["simulate"]->add_option("--periods", sim_periods, "number of periods");
  std::string url, category, area = "Edmonton", endpoint = kDefaultOverpassUrl, dest;
  bool print_query = false;
  auto* fetch = subs["fetch"];
  fetch->add_option("--url", url, "URL to download");
  fetch->add_option("--overpass", category, "point-of-interest category to query");
  fetch->add_option("--area", area, "administrative area name for Overpass");
  fetch->add_option("--endpoint", endpoint, "Overpass API endpoint");
  fetch->add_option("--dest", dest, "destination file");
  fetch->add_flag("--print-query", print_query, "print the Overpass query and exit");
  std::size_t trees = 0;
  subs["importance"]->add_option("--trees", trees, "trees per forest");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = effective_config(common);
    if (trees) cfg.n_trees = trees;
    if (!cutoff.empty()) {
      auto t = parse_timestamp(cutoff, TimeZone::utc());
      if (!t) throw Error(Errc::invalid_argument, "bad --cutoff '" + cutoff + "'");
      cfg.cutoff = *t;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "describe") return cmd_describe(cfg, out);
    if (cmd == "correlate") return cmd_correlate(cfg, out);
    if (cmd == "importance") return cmd_importance(cfg, out);
    if (cmd == "voronoi") return cmd_voronoi(cfg, out);
    if (cmd == "fit") return cmd_fit(cfg, out, err);
    if (cmd == "predict") return cmd_predict(cfg, models_dir, out, err);
    if (cmd == "evaluate") return cmd_evaluate(cfg, out, err);
    if (cmd == "classify") return cmd_classify(cfg, out, err);
    if (cmd == "compare-periods") return cmd_compare(cfg, out, err);
    if (cmd == "simulate") return cmd_simulate(cfg, sim_regions, sim_periods, out);
    if (cmd == "fetch") return cmd_fetch(cfg, url, category, area, endpoint, dest, print_query, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ember::cli
