#include "ember/describe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "ember/csv.hpp"
#include "ember/error.hpp"

namespace ember {

SeriesStats describe_series(std::span<const double> series, StdDevKind kind) {
  if (series.empty()) throw Error(Errc::empty, "describe: empty series");
  SeriesStats s;
  s.n = series.size();
  double sum = 0;
  for (double v : series) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0;
  for (double v : series) ss += (v - s.mean) * (v - s.mean);
  if (kind == StdDevKind::population)
    s.stddev = std::sqrt(ss / static_cast<double>(s.n));
  else
    s.stddev = s.n < 2 ? 0.0 : std::sqrt(ss / static_cast<double>(s.n - 1));
  if (s.mean > 0) s.cv = s.stddev / s.mean;
  return s;
}

std::vector<DescriptiveRow> describe(const Panel& panel, DescribeLevel level, StdDevKind kind) {
  if (panel.empty()) throw Error(Errc::empty, "describe: empty panel");
  std::vector<DescriptiveRow> rows;
  for (EventType type : panel.event_types()) {
    std::vector<double> series;
    if (level == DescribeLevel::city) {
      std::map<Timestamp, double> per_period;
      for (const auto& o : panel.observations)
        if (o.event_type == type) per_period[o.period_start] += static_cast<double>(o.count);
      for (const auto& [t, c] : per_period) series.push_back(c);
    } else {
      for (const auto& o : panel.observations)
        if (o.event_type == type) series.push_back(static_cast<double>(o.count));
    }
    const auto s = describe_series(series, kind);
    rows.push_back({type, panel.period_kind, s.mean, s.stddev, s.cv, s.n});
  }
  return rows;
}

std::vector<DescriptiveRow> describe_events(std::span<const EventRecord> events, std::span<const std::string> regions,
                                            PeriodKind kind, TimeSpan span, std::span<const EventType> types,
                                            const TimeZone& zone, DescribeLevel level, StdDevKind sd) {
  const auto bounds = period_boundaries(kind, span, zone);
  if (bounds.empty())
    throw Error(Errc::empty_span, "span holds no full " + std::string(to_string(kind)) + " period");
  std::unordered_map<std::string, std::size_t> region_idx;
  for (const auto& r : regions) region_idx.emplace(r, region_idx.size());
  const std::size_t R = region_idx.size(), Q = bounds.size() - 1;

  std::vector<DescriptiveRow> rows;
  for (EventType type : types) {
    if (std::any_of(rows.begin(), rows.end(), [&](const DescriptiveRow& r) { return r.event_type == type; })) continue;
    std::unordered_map<std::uint64_t, double> cells;  // nonzero cells only
    for (const auto& e : events) {
      if (e.event_type != type || !e.region_id) continue;
      auto it = region_idx.find(*e.region_id);
      if (it == region_idx.end()) continue;
      if (e.dispatch_time < bounds.front() || !(e.dispatch_time < bounds.back())) continue;
      const auto q = std::size_t(std::upper_bound(bounds.begin(), bounds.end(), e.dispatch_time) - bounds.begin()) - 1;
      const std::uint64_t key = level == DescribeLevel::city ? q : std::uint64_t(it->second) * Q + q;
      cells[key] += 1;
    }
    const double n = level == DescribeLevel::city ? double(Q) : double(R * Q);
    if (n == 0) throw Error(Errc::empty, "describe: no cells");
    std::vector<std::pair<std::uint64_t, double>> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end());
    double total = 0;
    for (const auto& c : sorted) total += c.second;
    const double mean = total / n;
    double ss = (n - double(sorted.size())) * mean * mean;
    for (const auto& c : sorted) ss += (c.second - mean) * (c.second - mean);
    double var = 0;
    if (sd == StdDevKind::population) var = ss / n;
    else if (n > 1) var = ss / (n - 1);
    DescriptiveRow row{type, kind, mean, std::sqrt(var), std::nullopt, std::size_t(n)};
    if (mean > 0) row.cv = row.stddev_sigma / mean;
    rows.push_back(row);
  }
  return rows;
}

std::string describe_to_csv(const std::vector<DescriptiveRow>& rows) {
  std::string out = "event_type,interval,mean,stddev,cv\n";
  for (const auto& r : rows)
    out += csv::join({std::string(to_string(r.event_type)), std::string(to_string(r.period_kind)),
                      csv::format_number(r.mean_mu), csv::format_number(r.stddev_sigma),
                      r.cv ? csv::format_number(*r.cv) : "NA"}) +
           "\n";
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::length_mismatch, "pearson: series lengths differ");
  if (x.size() < 2) throw Error(Errc::invalid_argument, "pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw Error(Errc::zero_variance, "pearson: constant series");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(const Panel& panel, CorrelationBasis basis) {
  CorrelationMatrix m;
  m.feature_names = panel.feature_names;
  m.event_types = panel.event_types();
  const std::size_t nf = m.feature_names.size(), nt = m.event_types.size();
  m.rho.assign(nf * nt, std::nullopt);

  auto safe_pearson = [](const std::vector<double>& a, const std::vector<double>& b) -> std::optional<double> {
    try {
      return pearson(a, b);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<double> y;
    std::vector<std::vector<double>> xs(nf);
    if (basis == CorrelationBasis::span_total) {
      std::vector<std::string> order;
      std::unordered_map<std::string, std::size_t> idx;
      for (const auto& o : panel.observations) {
        if (o.event_type != m.event_types[t]) continue;
        auto [it, fresh] = idx.emplace(o.region_id, order.size());
        if (fresh) {
          order.push_back(o.region_id);
          y.push_back(0);
          for (std::size_t f = 0; f < nf; ++f) xs[f].push_back(o.x[f]);
        }
        y[it->second] += static_cast<double>(o.count);
      }
    } else {
      for (const auto& o : panel.observations) {
        if (o.event_type != m.event_types[t]) continue;
        y.push_back(static_cast<double>(o.count));
        for (std::size_t f = 0; f < nf; ++f) xs[f].push_back(o.x[f]);
      }
    }
    for (std::size_t f = 0; f < nf; ++f) m.rho[f * nt + t] = safe_pearson(xs[f], y);
  }
  return m;
}

std::string correlation_to_csv(const CorrelationMatrix& m, std::optional<int> decimals) {
  std::vector<std::string> fields{"feature"};
  for (auto t : m.event_types) fields.emplace_back(to_string(t));
  std::string out = csv::join(fields) + "\n";
  for (std::size_t f = 0; f < m.feature_names.size(); ++f) {
    fields.assign({m.feature_names[f]});
    for (std::size_t t = 0; t < m.event_types.size(); ++t) {
      const auto& v = m.at(f, t);
      if (!v) {
        fields.emplace_back("NA");
      } else if (decimals) {
        const double scale = std::pow(10.0, *decimals);
        double r = std::round(*v * scale) / scale;
        if (r == 0) r = 0;  // no "-0"
        fields.push_back(csv::format_number(r));
      } else {
        fields.push_back(csv::format_number(*v));
      }
    }
    out += csv::join(fields) + "\n";
  }
  return out;
}

double Ecdf::operator()(double v) const {
  auto it = std::upper_bound(thresholds.begin(), thresholds.end(), v);
  if (it == thresholds.begin()) return 0.0;
  return cumulative[static_cast<std::size_t>(it - thresholds.begin()) - 1];
}

Ecdf residual_ecdf(std::span<const double> abs_errors) {
  if (abs_errors.empty()) throw Error(Errc::empty, "ecdf: no values");
  std::vector<double> v(abs_errors.begin(), abs_errors.end());
  for (double e : v)
    if (!(e >= 0) || !std::isfinite(e)) throw Error(Errc::invalid_argument, "ecdf: values must be finite and >= 0");
  std::sort(v.begin(), v.end());
  Ecdf f;
  const double n = static_cast<double>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i + 1 < v.size() && v[i + 1] == v[i]) continue;
    f.thresholds.push_back(v[i]);
    f.cumulative.push_back(i + 1 == v.size() ? 1.0 : static_cast<double>(i + 1) / n);
  }
  return f;
}

std::string ecdf_to_csv(const Ecdf& f) {
  std::string out = "threshold,fraction\n";
  for (std::size_t i = 0; i < f.thresholds.size(); ++i)
    out += csv::format_number(f.thresholds[i]) + "," + csv::format_number(f.cumulative[i]) + "\n";
  return out;
}

}  // namespace ember
