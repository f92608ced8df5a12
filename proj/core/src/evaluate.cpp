#include "ember/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "ember/csv.hpp"
#include "ember/error.hpp"
#include "ember/geojson.hpp"

namespace ember {

namespace {

void check_lengths(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    throw Error(Errc::length_mismatch,
                "actuals and predictions differ in length (" + std::to_string(y.size()) + " vs " +
                    std::to_string(yhat.size()) + ")");
  if (y.empty()) throw Error(Errc::empty, "no observations to score");
}

void assert_ordering(double mae_v, double rmse_v) {
  // Cauchy-Schwarz; a violation means a bug, not bad input
  if (rmse_v < mae_v * (1 - 1e-12)) throw std::logic_error("RMSE below MAE");
}

}  // namespace

double mae(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
  return s / double(y.size());
}

double rmse(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y, yhat);
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return std::sqrt(s / double(y.size()));
}

std::vector<double> absolute_errors(const Nb2Model& model, const Panel& panel) {
  const auto mu = predict(model, panel);
  std::vector<double> out(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) out[i] = std::abs(double(panel.observations[i].count) - mu[i]);
  return out;
}

MetricReport evaluate_model(const Nb2Model& model, const Panel& test, const std::string& granularity) {
  if (test.empty()) throw Error(Errc::empty, "test panel is empty");
  const auto mu = predict(model, test);
  std::vector<double> y(test.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = double(test.observations[i].count);

  MetricReport r;
  r.event_type = test.observations.front().event_type;
  r.period_kind = test.period_kind;
  r.granularity = granularity;
  r.n = y.size();
  r.mae_obs = mae(y, mu);
  r.rmse = rmse(y, mu);
  assert_ordering(r.mae_obs, r.rmse);

  struct Acc {
    double pred = 0, act = 0, abs = 0, sq = 0;
    std::size_t n = 0;
  };
  std::map<std::string, Acc> acc;
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto& a = acc[test.observations[i].region_id];
    a.pred += mu[i];
    a.act += y[i];
    a.abs += std::abs(y[i] - mu[i]);
    a.sq += (y[i] - mu[i]) * (y[i] - mu[i]);
    ++a.n;
  }
  double total = 0;
  for (const auto& [id, a] : acc) {
    RegionError e;
    e.region_id = id;
    e.n = a.n;
    e.mean_predicted = a.pred / double(a.n);
    e.mean_actual = a.act / double(a.n);
    e.abs_error = std::abs(e.mean_predicted - e.mean_actual);
    e.mae = a.abs / double(a.n);
    e.rmse = std::sqrt(a.sq / double(a.n));
    total += e.abs_error;
    r.per_region.push_back(std::move(e));
  }
  r.ae_region_mean = total / double(r.per_region.size());
  return r;
}

PeriodComparison compare_periods(const Panel& slice, Timestamp cutoff, const std::vector<std::string>& features,
                                 const CompareOptions& options) {
  auto [before, after] = split_by_date(slice, cutoff);
  PeriodComparison cmp;
  cmp.cutoff = cutoff;
  auto side = [&](const Panel& p, const char* label, Nb2Model& model, MetricReport& report) {
    try {
      if (p.empty()) throw Error(Errc::empty, "no observations");
      const Split s = split(p, options.train_fraction, options.seed);
      model = fit_nb2(s.train, features, options.fit);
      report = evaluate_model(model, s.test);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(label) + ": " + e.what(), e.detail());
    }
  };
  side(before, "before", cmp.model_before, cmp.before);
  side(after, "after", cmp.model_after, cmp.after);

  std::map<std::string, RegionDelta> d;
  for (const auto& e : cmp.before.per_region) {
    d[e.region_id].region_id = e.region_id;
    d[e.region_id].rmse_before = e.rmse;
  }
  for (const auto& e : cmp.after.per_region) {
    d[e.region_id].region_id = e.region_id;
    d[e.region_id].rmse_after = e.rmse;
  }
  for (auto& [id, v] : d) cmp.per_region_delta.push_back(std::move(v));
  return cmp;
}

std::string metrics_to_csv(std::span<const MetricsRow> rows) {
  std::string out = "station,model,event_type,mae,rmse\n";
  for (const auto& r : rows) {
    const std::string type = r.report.event_type ? std::string(to_string(*r.report.event_type)) : "";
    out += csv::join({r.station, r.model, type, csv::format_number(r.report.mae_obs),
                      csv::format_number(r.report.rmse)}) +
           "\n";
  }
  return out;
}

std::string comparison_to_csv(std::span<const PeriodComparison> rows) {
  std::string out = "event_type,period_kind,mae_before,rmse_before,mae_after,rmse_after\n";
  for (const auto& c : rows) {
    const std::string type = c.before.event_type ? std::string(to_string(*c.before.event_type)) : "";
    out += csv::join({type, std::string(to_string(c.before.period_kind)), csv::format_number(c.before.mae_obs),
                      csv::format_number(c.before.rmse), csv::format_number(c.after.mae_obs),
                      csv::format_number(c.after.rmse)}) +
           "\n";
  }
  return out;
}

std::string region_delta_to_csv(const PeriodComparison& cmp) {
  std::string out = "region_id,rmse_before,rmse_after\n";
  auto num = [](const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string("NA"); };
  for (const auto& d : cmp.per_region_delta)
    out += csv::join({d.region_id, num(d.rmse_before), num(d.rmse_after)}) + "\n";
  return out;
}

std::string error_geojson(const MetricReport& report, std::span<const RegionGeometry> geometry,
                          const std::vector<std::pair<std::string, geojson::Value>>& metadata) {
  std::map<std::string, const RegionError*> by_id;
  for (const auto& e : report.per_region) by_id[e.region_id] = &e;
  std::vector<geojson::Feature> features;
  for (const auto& g : geometry) {
    auto it = by_id.find(g.region_id);
    if (it == by_id.end()) continue;
    geojson::Feature f;
    f.geometry = g.polygon;
    f.properties = {{"region_id", g.region_id},
                    {"abs_error", it->second->abs_error},
                    {"mean_predicted", it->second->mean_predicted},
                    {"mean_actual", it->second->mean_actual}};
    features.push_back(std::move(f));
  }
  return geojson::write_feature_collection(features, metadata);
}

}  // namespace ember
