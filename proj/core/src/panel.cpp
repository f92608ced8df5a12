#include "ember/panel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <unordered_map>

#include "ember/csv.hpp"
#include "ember/error.hpp"
#include "ember/log.hpp"
#include "ember/rng.hpp"

namespace ember {

std::vector<std::string> Panel::region_ids() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& o : observations)
    if (seen.insert(o.region_id).second) out.push_back(o.region_id);
  return out;
}

std::vector<EventType> Panel::event_types() const {
  std::vector<EventType> out;
  for (const auto& o : observations)
    if (std::find(out.begin(), out.end(), o.event_type) == out.end()) out.push_back(o.event_type);
  return out;
}

std::vector<Timestamp> Panel::period_starts() const {
  std::set<Timestamp> s;
  for (const auto& o : observations) s.insert(o.period_start);
  return {s.begin(), s.end()};
}

Panel Panel::slice(EventType type) const {
  Panel out;
  out.feature_names = feature_names;
  out.period_kind = period_kind;
  out.first_period = first_period;
  out.last_period = last_period;
  for (const auto& o : observations)
    if (o.event_type == type) out.observations.push_back(o);
  return out;
}

std::vector<Timestamp> period_boundaries(PeriodKind kind, TimeSpan span, const TimeZone& zone) {
  std::vector<Timestamp> b;
  if (!(span.start < span.end)) return b;
  LocalTime local = period_floor(zone.to_local(span.start), kind);
  Timestamp t = zone.to_sys(local);
  while (t < span.start) {
    local = period_next(local, kind);
    t = zone.to_sys(local);
  }
  while (t <= span.end) {
    if (b.empty() || b.back() < t) b.push_back(t);
    local = period_next(local, kind);
    t = zone.to_sys(local);
  }
  if (b.size() < 2) b.clear();
  return b;
}

TimeSpan covering_span(std::span<const EventRecord> events, PeriodKind kind, const TimeZone& zone) {
  if (events.empty()) throw Error(Errc::empty_span, "no events to derive a span from");
  auto [lo, hi] = std::minmax_element(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return a.dispatch_time < b.dispatch_time;
  });
  const LocalTime first = period_floor(zone.to_local(lo->dispatch_time), kind);
  const LocalTime last = period_floor(zone.to_local(hi->dispatch_time), kind);
  return {zone.to_sys(first), zone.to_sys(period_next(last, kind))};
}

Panel aggregate(std::span<const EventRecord> events, std::span<const std::string> regions, PeriodKind kind,
                TimeSpan span, std::span<const EventType> types, const TimeZone& zone, AggregateStats* stats) {
  const auto bounds = period_boundaries(kind, span, zone);
  if (bounds.empty())
    throw Error(Errc::empty_span, "span " + format_timestamp(span.start) + " .. " + format_timestamp(span.end) +
                                      " holds no full " + std::string(to_string(kind)) + " period");
  if (bounds.front() != span.start)
    log::warn("dropping partial " + std::string(to_string(kind)) + " period at span start " +
              format_timestamp(span.start));
  if (bounds.back() != span.end)
    log::warn("dropping partial " + std::string(to_string(kind)) + " period at span end " +
              format_timestamp(span.end));

  std::vector<std::string> region_list(regions.begin(), regions.end());
  std::sort(region_list.begin(), region_list.end());
  region_list.erase(std::unique(region_list.begin(), region_list.end()), region_list.end());
  std::vector<EventType> type_list;
  for (auto t : types)
    if (std::find(type_list.begin(), type_list.end(), t) == type_list.end()) type_list.push_back(t);

  std::unordered_map<std::string, std::size_t> region_idx;
  for (std::size_t i = 0; i < region_list.size(); ++i) region_idx.emplace(region_list[i], i);
  std::array<int, 12> type_idx;
  type_idx.fill(-1);
  for (std::size_t i = 0; i < type_list.size(); ++i) type_idx[static_cast<int>(type_list[i])] = static_cast<int>(i);

  const std::size_t n_periods = bounds.size() - 1;
  const std::size_t nt = type_list.size();
  std::vector<std::int64_t> counts(region_list.size() * n_periods * nt, 0);
  AggregateStats st;
  for (const auto& e : events) {
    const int ti = type_idx[static_cast<int>(e.event_type)];
    if (ti < 0) {
      ++st.other_type;
      continue;
    }
    if (!e.region_id) {
      ++st.unknown_region;
      continue;
    }
    auto rit = region_idx.find(*e.region_id);
    if (rit == region_idx.end()) {
      ++st.unknown_region;
      continue;
    }
    auto pit = std::upper_bound(bounds.begin(), bounds.end(), e.dispatch_time);
    if (pit == bounds.begin() || pit == bounds.end()) {
      ++st.outside_span;
      continue;
    }
    const std::size_t p = static_cast<std::size_t>(pit - bounds.begin()) - 1;
    ++counts[(rit->second * n_periods + p) * nt + static_cast<std::size_t>(ti)];
    ++st.counted;
  }
  if (stats) *stats = st;

  Panel panel;
  panel.period_kind = kind;
  panel.first_period = bounds.front();
  panel.last_period = bounds[n_periods - 1];
  panel.observations.reserve(counts.size());
  for (std::size_t r = 0; r < region_list.size(); ++r)
    for (std::size_t p = 0; p < n_periods; ++p)
      for (std::size_t t = 0; t < nt; ++t) {
        Observation o;
        o.region_id = region_list[r];
        o.period_start = bounds[p];
        o.period_kind = kind;
        o.exposure = 1.0;
        o.event_type = type_list[t];
        o.count = counts[(r * n_periods + p) * nt + t];
        panel.observations.push_back(std::move(o));
      }
  return panel;
}

Panel join_features(const Panel& counts, const FeatureTable& features,
                    const std::vector<std::string>& feature_subset) {
  const FeatureTable table = feature_subset.empty() ? features : features.select(feature_subset);
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < table.rows(); ++r) row_of.emplace(table.region_ids()[r], r);
  Panel out;
  out.feature_names = table.feature_names();
  out.period_kind = counts.period_kind;
  out.first_period = counts.first_period;
  out.last_period = counts.last_period;
  out.observations.reserve(counts.size());
  for (const auto& o : counts.observations) {
    auto it = row_of.find(o.region_id);
    if (it == row_of.end())
      throw Error(Errc::missing_region_features, "region '" + o.region_id + "' has no feature row");
    Observation copy = o;
    const auto row = table.row(it->second);
    copy.x.assign(row.begin(), row.end());
    out.observations.push_back(std::move(copy));
  }
  return out;
}

namespace {

Panel with_observations(const Panel& like, std::vector<Observation> obs) {
  Panel p;
  p.feature_names = like.feature_names;
  p.period_kind = like.period_kind;
  p.first_period = like.first_period;
  p.last_period = like.last_period;
  p.observations = std::move(obs);
  return p;
}

}  // namespace

Split split(const Panel& panel, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1))
    throw Error(Errc::invalid_argument, "train_fraction must lie in (0, 1)");
  if (panel.empty()) throw Error(Errc::empty, "cannot split an empty panel");
  const std::size_t n = panel.size();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto g = rng::engine(seed, {0x53504c4954ULL});
  rng::shuffle(std::span<std::size_t>(order), g);
  std::vector<char> in_train(n, 0);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;
  std::vector<Observation> tr, te;
  tr.reserve(n_train);
  te.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? tr : te).push_back(panel.observations[i]);
  Split s;
  s.train = with_observations(panel, std::move(tr));
  s.test = with_observations(panel, std::move(te));
  s.seed = seed;
  s.train_fraction = train_fraction;
  return s;
}

std::pair<Panel, Panel> split_by_date(const Panel& panel, Timestamp cutoff) {
  if (panel.empty()) throw Error(Errc::empty, "cannot split an empty panel");
  if (cutoff < panel.first_period || cutoff > panel.last_period)
    throw Error(Errc::cutoff_out_of_span, "cutoff " + format_timestamp(cutoff) + " outside panel span " +
                                              format_timestamp(panel.first_period) + " .. " +
                                              format_timestamp(panel.last_period));
  std::vector<Observation> before, after;
  for (const auto& o : panel.observations) (o.period_start < cutoff ? before : after).push_back(o);
  Panel b = with_observations(panel, std::move(before));
  Panel a = with_observations(panel, std::move(after));
  auto fix_span = [](Panel& p) {
    auto starts = p.period_starts();
    if (!starts.empty()) {
      p.first_period = starts.front();
      p.last_period = starts.back();
    }
  };
  fix_span(b);
  fix_span(a);
  return {std::move(b), std::move(a)};
}

std::string panel_to_csv(const Panel& panel) {
  std::vector<std::string> fields{"region_id", "period_start", "period_kind", "event_type", "count", "exposure"};
  for (const auto& f : panel.feature_names) fields.push_back(f);
  std::string out = csv::join(fields) + "\n";
  for (const auto& o : panel.observations) {
    fields.assign({o.region_id, format_timestamp(o.period_start), std::string(to_string(o.period_kind)),
                   std::string(to_string(o.event_type)), std::to_string(o.count), csv::format_number(o.exposure)});
    for (double v : o.x) fields.push_back(csv::format_number(v));
    out += csv::join(fields) + "\n";
  }
  return out;
}

Panel panel_from_csv(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.empty()) throw Error(Errc::empty_table, "panel: empty input");
  const auto& h = rows[0].fields;
  static const char* fixed[] = {"region_id", "period_start", "period_kind", "event_type", "count", "exposure"};
  if (h.size() < 6) throw Error(Errc::missing_column, "panel: header too short");
  for (std::size_t i = 0; i < 6; ++i)
    if (h[i] != fixed[i]) throw Error(Errc::missing_column, std::string("panel: expected column '") + fixed[i] + "'");
  Panel p;
  p.feature_names.assign(h.begin() + 6, h.end());
  bool have_kind = false;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    const long line = static_cast<long>(rows[r].line);
    const std::string at = "panel line " + std::to_string(line);
    if (f.size() != h.size()) throw Error(Errc::malformed_row, at + ": wrong field count", line);
    Observation o;
    o.region_id = f[0];
    auto ts = parse_timestamp(f[1], TimeZone::utc());
    if (!ts) throw Error(Errc::malformed_timestamp, at + ": bad period_start", line);
    o.period_start = *ts;
    auto kind = parse_period_kind(f[2]);
    if (!kind) throw Error(Errc::malformed_value, at + ": bad period_kind", line);
    if (have_kind && *kind != p.period_kind)
      throw Error(Errc::malformed_value, at + ": mixed period kinds in one panel", line);
    p.period_kind = *kind;
    have_kind = true;
    o.period_kind = *kind;
    auto type = parse_event_type(f[3]);
    if (!type) throw Error(Errc::unknown_event_type, at + ": unknown event type", line);
    o.event_type = *type;
    auto count = csv::parse_number(f[4]);
    if (!count || *count < 0 || std::floor(*count) != *count)
      throw Error(Errc::malformed_value, at + ": count must be a non-negative integer", line);
    o.count = static_cast<std::int64_t>(*count);
    auto exposure = csv::parse_number(f[5]);
    if (!exposure || !(*exposure > 0)) throw Error(Errc::malformed_value, at + ": exposure must be > 0", line);
    o.exposure = *exposure;
    for (std::size_t c = 6; c < f.size(); ++c) {
      auto v = csv::parse_number(f[c]);
      if (!v || *v < 0) throw Error(Errc::malformed_value, at + ": bad covariate", line);
      o.x.push_back(*v);
    }
    p.observations.push_back(std::move(o));
  }
  auto starts = p.period_starts();
  if (!starts.empty()) {
    p.first_period = starts.front();
    p.last_period = starts.back();
  }
  return p;
}

}  // namespace ember
