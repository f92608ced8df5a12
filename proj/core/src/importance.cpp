#include "ember/importance.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "ember/csv.hpp"
#include "ember/error.hpp"
#include "ember/log.hpp"
#include "ember/rng.hpp"

namespace ember {

namespace {

std::size_t resolve_mtry(const ForestConfig& c, std::size_t p) {
  std::size_t m = c.mtry == 0 ? (p + 2) / 3 : c.mtry;
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(p, 1));
}

void validate(const ForestConfig& c, std::size_t p) {
  if (c.n_trees < 1) throw Error(Errc::invalid_argument, "n_trees must be at least 1");
  if (c.mtry > p) throw Error(Errc::invalid_argument, "mtry exceeds the number of features");
  if (!(c.alpha_stop > 0 && c.alpha_stop < 1)) throw Error(Errc::invalid_argument, "alpha_stop must lie in (0, 1)");
  if (c.min_node < 1) throw Error(Errc::invalid_argument, "min_node must be at least 1");
  if (!(c.sample_fraction > 0 && c.sample_fraction < 1))
    throw Error(Errc::invalid_argument, "sample_fraction must lie in (0, 1)");
  if (p == 0) throw Error(Errc::invalid_argument, "dataset has no features");
}

struct Candidate {
  std::size_t feature;
  std::vector<double> xc;  // centered within the node
  double stat = 0;         // |sum xc * y|
  double scale = 0;        // sqrt(sum xc^2)
  std::size_t exceed = 0;
};

struct SplitPoint {
  bool ok = false;
  double threshold = 0;
};

SplitPoint best_split(const Dataset& d, std::span<const std::size_t> rows, std::size_t f, std::size_t min_node) {
  std::vector<std::pair<double, double>> xy;
  xy.reserve(rows.size());
  for (auto r : rows) xy.emplace_back(d.at(r, f), d.y[r]);
  std::sort(xy.begin(), xy.end());
  const std::size_t n = xy.size();
  double total = 0;
  for (auto& v : xy) total += v.second;
  double left = 0, best = -1;
  SplitPoint out;
  for (std::size_t k = 1; k < n; ++k) {
    left += xy[k - 1].second;
    if (k < min_node || n - k < min_node) continue;
    if (!(xy[k - 1].first < xy[k].first)) continue;
    const double right = total - left;
    const double gain = left * left / double(k) + right * right / double(n - k);
    if (gain > best) {
      best = gain;
      double mid = xy[k - 1].first + (xy[k].first - xy[k - 1].first) / 2;
      if (!(mid < xy[k].first)) mid = xy[k - 1].first;
      out = {true, mid};
    }
  }
  return out;
}

}  // namespace

Dataset importance_dataset(const Panel& panel, EventType type) {
  Dataset d;
  d.feature_names = panel.feature_names;
  std::map<std::string, std::size_t> index;
  std::vector<double> sums;
  std::vector<std::size_t> counts;
  for (const auto& o : panel.observations) {
    if (o.event_type != type) continue;
    auto [it, fresh] = index.emplace(o.region_id, sums.size());
    if (fresh) {
      sums.push_back(0);
      counts.push_back(0);
      d.x.insert(d.x.end(), o.x.begin(), o.x.end());
    }
    sums[it->second] += double(o.count);
    counts[it->second] += 1;
  }
  d.y.resize(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) d.y[i] = sums[i] / double(counts[i]);
  return d;
}

double Tree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& nd = nodes[i];
    i = std::size_t(row[std::size_t(nd.feature)] <= nd.threshold ? nd.left : nd.right);
  }
  return nodes[i].value;
}

bool Tree::uses(std::size_t feature) const {
  return std::any_of(nodes.begin(), nodes.end(), [&](const TreeNode& n) { return n.feature == int(feature); });
}

std::size_t Tree::leaves() const {
  return std::size_t(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

Tree fit_tree(const Dataset& data, std::span<const std::size_t> rows, const ForestConfig& config,
              std::uint64_t tree_seed) {
  const std::size_t p = data.p();
  validate(config, p);
  if (rows.size() < 2 * config.min_node)
    throw Error(Errc::too_few_rows, "tree needs at least " + std::to_string(2 * config.min_node) + " rows, got " +
                                        std::to_string(rows.size()));
  const std::size_t mtry = resolve_mtry(config, p);
  auto g = rng::engine(tree_seed);

  Tree tree;
  struct Pending {
    std::size_t node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.push_back({});
  stack.push_back({0, {rows.begin(), rows.end()}});

  std::vector<std::size_t> order(p);
  std::vector<double> yperm;
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    const auto& r = job.rows;
    const std::size_t n = r.size();
    double ysum = 0;
    for (auto i : r) ysum += data.y[i];
    {
      auto& nd = tree.nodes[job.node];
      nd.n = n;
      nd.value = ysum / double(n);
    }
    if (n < 2 * config.min_node) continue;

    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < mtry; ++k) {
      const std::size_t j = k + std::size_t(rng::uniform_index(g, p - k));
      std::swap(order[k], order[j]);
    }

    const double ymean = ysum / double(n);
    std::vector<Candidate> cands;
    for (std::size_t k = 0; k < mtry; ++k) {
      Candidate c;
      c.feature = order[k];
      c.xc.resize(n);
      double m = 0;
      for (std::size_t i = 0; i < n; ++i) m += data.at(r[i], c.feature);
      m /= double(n);
      double sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        c.xc[i] = data.at(r[i], c.feature) - m;
        sxx += c.xc[i] * c.xc[i];
        sxy += c.xc[i] * (data.y[r[i]] - ymean);
      }
      if (!(sxx > 0)) continue;
      c.stat = std::abs(sxy);
      c.scale = std::sqrt(sxx);
      cands.push_back(std::move(c));
    }
    if (cands.empty()) continue;

    yperm.resize(n);
    for (std::size_t i = 0; i < n; ++i) yperm[i] = data.y[r[i]] - ymean;
    for (std::size_t b = 0; b < config.n_permutations; ++b) {
      rng::shuffle(std::span<double>(yperm), g);
      for (auto& c : cands) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += c.xc[i] * yperm[i];
        // relative slack keeps affine rescaling of a column from flipping ties
        if (std::abs(s) >= c.stat * (1 - 1e-12)) ++c.exceed;
      }
    }

    const Candidate* best = nullptr;
    double best_p = 2;
    for (const auto& c : cands) {
      const double pv = double(1 + c.exceed) / double(config.n_permutations + 1);
      if (pv < best_p || (pv == best_p && c.stat / c.scale > best->stat / best->scale * (1 + 1e-12))) {
        best = &c;
        best_p = pv;
      }
    }
    tree.nodes[job.node].p_value = best_p;
    if (best_p > config.alpha_stop) continue;

    const SplitPoint sp = best_split(data, r, best->feature, config.min_node);
    if (!sp.ok) continue;
    std::vector<std::size_t> lr, rr;
    for (auto i : r) (data.at(i, best->feature) <= sp.threshold ? lr : rr).push_back(i);

    const int li = int(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    auto& nd = tree.nodes[job.node];
    nd.feature = int(best->feature);
    nd.threshold = sp.threshold;
    nd.left = li;
    nd.right = li + 1;
    // right first so the left subtree is grown (and draws randomness) first
    stack.push_back({std::size_t(li + 1), std::move(rr)});
    stack.push_back({std::size_t(li), std::move(lr)});
  }
  return tree;
}

Forest fit_forest(const Dataset& data, const ForestConfig& config) {
  validate(config, data.p());
  const std::size_t n = data.n();
  const std::size_t m = std::size_t(std::llround(config.sample_fraction * double(n)));
  if (m < 2 * config.min_node || m >= n)
    throw Error(Errc::too_few_rows, "dataset of " + std::to_string(n) + " rows is too small for the forest");

  Forest forest;
  forest.config = config;
  forest.trees.resize(config.n_trees);
  forest.out_of_bag.resize(config.n_trees);

  auto grow = [&](std::size_t t) {
    auto g = rng::engine(config.seed, {t, 0});
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t j = k + std::size_t(rng::uniform_index(g, n - k));
      std::swap(idx[k], idx[j]);
    }
    std::vector<std::size_t> in(idx.begin(), idx.begin() + std::ptrdiff_t(m));
    std::vector<std::size_t> out(idx.begin() + std::ptrdiff_t(m), idx.end());
    std::sort(in.begin(), in.end());
    std::sort(out.begin(), out.end());
    forest.trees[t] = fit_tree(data, in, config, rng::derive(config.seed, {t, 1}));
    forest.out_of_bag[t] = std::move(out);
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(config.threads, unsigned(config.n_trees)));
  if (threads == 1) {
    for (std::size_t t = 0; t < config.n_trees; ++t) grow(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::size_t t; (t = next.fetch_add(1)) < config.n_trees;) {
          try {
            grow(t);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return forest;
}

ImportanceReport permutation_importance(const Forest& forest, const Dataset& data, double threshold) {
  const std::size_t p = data.p();
  const std::size_t T = forest.trees.size();
  // per-tree contributions, reduced in tree order
  std::vector<double> sum(p, 0), sumsq(p, 0);
  std::vector<double> row;
  for (std::size_t t = 0; t < T; ++t) {
    const Tree& tree = forest.trees[t];
    const auto& oob = forest.out_of_bag[t];
    if (oob.empty()) continue;
    double base = 0;
    for (auto i : oob) {
      const double e = data.y[i] - tree.predict(data.row(i));
      base += e * e;
    }
    base /= double(oob.size());
    for (std::size_t f = 0; f < p; ++f) {
      if (!tree.uses(f)) continue;
      std::vector<double> col(oob.size());
      for (std::size_t k = 0; k < oob.size(); ++k) col[k] = data.at(oob[k], f);
      auto g = rng::engine(forest.config.seed, {t, 2, f});
      rng::shuffle(std::span<double>(col), g);
      double mse = 0;
      for (std::size_t k = 0; k < oob.size(); ++k) {
        auto src = data.row(oob[k]);
        row.assign(src.begin(), src.end());
        row[f] = col[k];
        const double e = data.y[oob[k]] - tree.predict(row);
        mse += e * e;
      }
      const double d = mse / double(oob.size()) - base;
      sum[f] += d;
      sumsq[f] += d * d;
    }
  }

  std::vector<double> raw(p), kept(p);
  for (std::size_t f = 0; f < p; ++f) {
    raw[f] = sum[f] / double(T);
    double v = raw[f];
    if (forest.config.min_z > 0 && T > 1) {
      const double var = std::max(0.0, (sumsq[f] - double(T) * raw[f] * raw[f]) / double(T - 1));
      const double se = std::sqrt(var / double(T));
      if (!(v > forest.config.min_z * se)) v = 0;
    }
    kept[f] = std::max(0.0, v);
  }
  const double total = std::accumulate(kept.begin(), kept.end(), 0.0);

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> score(p);
  for (std::size_t f = 0; f < p; ++f) score[f] = total > 0 ? kept[f] / total : 0;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return data.feature_names[a] < data.feature_names[b];
  });

  ImportanceReport rep;
  rep.threshold = threshold;
  for (auto f : order) {
    rep.features.push_back(data.feature_names[f]);
    rep.scores.push_back(score[f]);
    rep.raw.push_back(raw[f]);
    if (score[f] >= threshold) rep.selected.push_back(data.feature_names[f]);
  }
  return rep;
}

FeatureSelection select_features(const ImportanceReport& report, double threshold) {
  FeatureSelection sel;
  for (std::size_t i = 0; i < report.features.size(); ++i)
    if (report.scores[i] >= threshold) sel.features.push_back(report.features[i]);
  if (sel.features.empty() && !report.features.empty()) {
    log::warn("EmptySelection: no feature reaches importance " + csv::format_number(threshold) +
              "; falling back to '" + report.features.front() + "'");
    sel.features.push_back(report.features.front());
    sel.fallback = true;
  }
  return sel;
}

std::string importance_to_csv(const ImportanceReport& report) {
  std::string out = "feature,score,selected\n";
  for (std::size_t i = 0; i < report.features.size(); ++i) {
    out += csv::escape(report.features[i]) + "," + csv::format_number(report.scores[i]) + "," +
           (report.scores[i] >= report.threshold ? "true" : "false") + "\n";
  }
  return out;
}

std::string importance_to_json(const ImportanceReport& report, const ForestConfig& config) {
  nlohmann::ordered_json j;
  j["threshold"] = report.threshold;
  auto& ranked = j["ranked"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.features.size(); ++i)
    ranked.push_back({{"feature", report.features[i]}, {"score", report.scores[i]}, {"raw", report.raw[i]}});
  j["selected"] = report.selected;
  j["config"] = {{"n_trees", config.n_trees},
                 {"mtry", config.mtry},
                 {"min_node", config.min_node},
                 {"n_permutations", config.n_permutations},
                 {"alpha_stop", config.alpha_stop},
                 {"sample_fraction", config.sample_fraction},
                 {"min_z", config.min_z},
                 {"seed", config.seed}};
  return j.dump(2) + "\n";
}

}  // namespace ember
