#include "ember/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ember/csv.hpp"
#include "ember/error.hpp"

namespace ember {

namespace {

// Above this size the O(n^3) two-pass cost table gets slow; fall back to
// shifted running sums.
constexpr std::size_t kExactTableLimit = 3000;

}  // namespace

double class_ssd(std::span<const double> v, std::size_t first, std::size_t last) {
  double s = 0;
  for (std::size_t i = first; i <= last; ++i) s += v[i];
  const double mean = s / double(last - first + 1);
  double ss = 0;
  for (std::size_t i = first; i <= last; ++i) ss += (v[i] - mean) * (v[i] - mean);
  return ss;
}

JenksResult jenks(std::span<const double> values, std::size_t k) {
  if (k < 2) throw Error(Errc::invalid_argument, "need at least 2 classes");
  const std::size_t n = values.size();
  if (n < k)
    throw Error(Errc::too_few_values, std::to_string(n) + " values cannot form " + std::to_string(k) + " classes");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(Errc::invalid_argument, "values must be finite");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());

  // cost[i * n + j] = ssd of v[i..j]
  std::vector<double> cost(n * n, 0);
  if (n <= kExactTableLimit) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = i; j < n; ++j) {
        s += v[j];
        const double mean = s / double(j - i + 1);
        double ss = 0;
        for (std::size_t t = i; t <= j; ++t) ss += (v[t] - mean) * (v[t] - mean);
        cost[i * n + j] = ss;
      }
    }
  } else {
    const double shift = v[n / 2];
    std::vector<double> s1(n + 1, 0), s2(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      s1[i + 1] = s1[i] + (v[i] - shift);
      s2[i + 1] = s2[i] + (v[i] - shift) * (v[i] - shift);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double a = s1[j + 1] - s1[i];
        cost[i * n + j] = std::max(0.0, s2[j + 1] - s2[i] - a * a / double(j - i + 1));
      }
  }

  // best[c][e]: minimal left-to-right total for v[0..e] in c + 1 classes.
  // Float addition is monotone, so the recursion yields the exact float
  // minimum of that summation order.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(k, std::vector<double>(n, inf));
  for (std::size_t e = 0; e < n; ++e) best[0][e] = cost[e];
  for (std::size_t c = 1; c < k; ++c)
    for (std::size_t e = c; e < n; ++e) {
      double m = inf;
      for (std::size_t s = c; s <= e; ++s) m = std::min(m, best[c - 1][s - 1] + cost[s * n + e]);
      best[c][e] = m;
    }

  // reach[c][e]: state (c, e) at its optimal value extends to the optimum
  std::vector<std::vector<char>> reach(k, std::vector<char>(n, 0));
  reach[k - 1][n - 1] = 1;
  for (std::size_t c = k - 1; c-- > 0;)
    for (std::size_t e = c; e + 1 < n; ++e)
      for (std::size_t e2 = e + 1; e2 < n && !reach[c][e]; ++e2)
        if (reach[c + 1][e2] && best[c][e] + cost[(e + 1) * n + e2] == best[c + 1][e2]) reach[c][e] = 1;

  JenksResult r;
  std::size_t e = 0;
  while (!reach[0][e]) ++e;
  r.ends.push_back(e);
  for (std::size_t c = 1; c < k; ++c) {
    std::size_t e2 = e + 1;
    while (!(reach[c][e2] && best[c - 1][e] + cost[(e + 1) * n + e2] == best[c][e2])) ++e2;
    r.ends.push_back(e2);
    e = e2;
  }
  std::size_t start = 0;
  for (std::size_t c = 0; c < k; ++c) {
    r.cost += cost[start * n + r.ends[c]];
    start = r.ends[c] + 1;
    if (c + 1 < k) r.breaks.push_back(v[r.ends[c]]);
  }
  return r;
}

std::vector<double> jenks_breaks(std::span<const double> values, std::size_t k) { return jenks(values, k).breaks; }

std::vector<std::string> default_risk_labels(std::size_t k) {
  switch (k) {
    case 2: return {"Low", "Severe"};
    case 3: return {"Low", "Medium", "Severe"};
    case 4: return {"Low", "Medium", "High", "Severe"};
    default: break;
  }
  std::vector<std::string> out;
  for (std::size_t i = 1; i < k; ++i) out.push_back("Class " + std::to_string(i));
  out.push_back("Severe");
  return out;
}

std::size_t class_of(std::span<const double> breaks, double v) {
  return std::size_t(std::lower_bound(breaks.begin(), breaks.end(), v) - breaks.begin());
}

RiskClassification classify_regions(const std::vector<std::pair<std::string, double>>& predictions, std::size_t k,
                                    std::vector<std::string> labels) {
  if (labels.empty()) labels = default_risk_labels(k);
  if (labels.size() != k) throw Error(Errc::invalid_argument, "label count must equal the class count");
  std::vector<double> values;
  for (const auto& p : predictions) values.push_back(p.second);
  RiskClassification c;
  c.k = k;
  c.breaks = jenks_breaks(values, k);
  c.labels = std::move(labels);
  for (const auto& [id, v] : predictions) c.assignment.push_back({id, v, class_of(c.breaks, v)});
  return c;
}

std::string classification_to_csv(const RiskClassification& c) {
  std::string out = "region_id,value,class\n";
  for (const auto& a : c.assignment) out += csv::join({a.region_id, csv::format_number(a.value), c.label_of(a)}) + "\n";
  return out;
}

std::string classification_geojson(const RiskClassification& c, std::span<const RegionGeometry> geometry,
                                   const std::vector<std::pair<std::string, geojson::Value>>& metadata) {
  std::map<std::string, const RiskAssignment*> by_id;
  for (const auto& a : c.assignment) by_id[a.region_id] = &a;
  std::vector<geojson::Feature> features;
  for (const auto& g : geometry) {
    auto it = by_id.find(g.region_id);
    if (it == by_id.end()) continue;
    geojson::Feature f;
    f.geometry = g.polygon;
    f.properties = {{"region_id", g.region_id},
                    {"risk_class", c.label_of(*it->second)},
                    {"predicted_mean", it->second->value}};
    features.push_back(std::move(f));
  }
  return geojson::write_feature_collection(features, metadata);
}

}  // namespace ember
