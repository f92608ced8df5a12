#include "ember/nb2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "ember/error.hpp"
#include "ember/log.hpp"

namespace ember {

namespace {

constexpr double kEtaMax = 700;
constexpr double kSeparation = 30;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log prod_{j<y} (1 + j alpha) = lgamma(y + 1/a) - lgamma(1/a) + y log a
double log_rising(std::int64_t y, double alpha) {
  if (y <= 0) return 0;
  if (y > 256 && alpha > 1e-6)
    return std::lgamma(double(y) + 1 / alpha) - std::lgamma(1 / alpha) + double(y) * std::log(alpha);
  double s = 0;
  for (std::int64_t j = 1; j < y; ++j) s += std::log1p(double(j) * alpha);
  return s;
}

struct Terms {
  double ll = 0;
  double g_eta = 0;
  double g_theta = 0;
  double h_ee = 0;
  double h_et = 0;
  double h_tt = 0;
};

// Contributions of one observation, derivatives in eta = log mu and
// theta = log alpha.
Terms terms(double y, double mu, double alpha, bool second) {
  Terms t;
  const double am = alpha * mu;
  const double l1 = std::log1p(am);
  const double q = 1 + am;
  const auto yi = static_cast<std::int64_t>(y);
  double G = 0, G1 = 0, G2 = 0;
  for (std::int64_t j = 1; j < yi; ++j) {
    const double jj = double(j);
    const double d = 1 + jj * alpha;
    G += std::log1p(jj * alpha);
    G1 += jj / d;
    if (second) G2 -= jj * jj / (d * d);
  }
  t.ll = G - std::lgamma(y + 1) + y * std::log(mu) - (y + 1 / alpha) * l1;
  t.g_eta = (y - mu) / q;
  t.g_theta = alpha * G1 + l1 / alpha - (y * alpha + 1) * mu / q;
  if (second) {
    t.h_ee = -mu * (1 + alpha * y) / (q * q);
    t.h_et = -am * (y - mu) / (q * q);
    t.h_tt = t.g_theta + alpha * alpha * G2 + 2 * mu / q - 2 * l1 / alpha + (y * alpha * alpha + alpha) * mu * mu / (q * q);
  }
  return t;
}

double eta_of(const Design& d, std::size_t i, std::span<const double> b) {
  double eta = b[0] + std::log(d.exposure[i]);
  auto r = d.row(i);
  for (std::size_t k = 0; k < r.size(); ++k) eta += b[k + 1] * r[k];
  return eta;
}

void check_design(const Design& d, std::span<const double> b) {
  if (b.size() != d.p() + 1)
    throw Error(Errc::invalid_argument, "expected " + std::to_string(d.p() + 1) + " coefficients, got " +
                                            std::to_string(b.size()));
}

// Solves A s = g for a symmetric A that should be positive definite; adds a
// diagonal ridge when it is not (or is nearly singular).
Eigen::VectorXd solve_step(const Eigen::MatrixXd& A, const Eigen::VectorXd& g, double ridge, bool& ridged) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  auto good = [&] {
    return ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all() && ldlt.rcond() > 1e-14;
  };
  ridged = false;
  if (good()) return ldlt.solve(g);
  ridged = true;
  const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  double lambda = ridge * scale;
  for (int k = 0; k < 40; ++k, lambda *= 10) {
    Eigen::MatrixXd B = A;
    B.diagonal().array() += lambda;
    ldlt.compute(B);
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0).all()) return ldlt.solve(g);
  }
  return g / scale;
}

// A coefficient running off to infinity keeps taking Newton steps of order
// one while the likelihood gain shrinks geometrically, so the likelihood test
// alone would stop it early instead of reporting separation.
bool steps_settled(const Eigen::VectorXd& s, std::span<const double> b, double tol) {
  const double lim = std::sqrt(tol);
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (std::abs(s[k]) > lim * (1 + std::abs(b[static_cast<std::size_t>(k)]))) return false;
  return true;
}

void check_separation(std::span<const double> b) {
  for (std::size_t k = 0; k < b.size(); ++k)
    if (!(std::abs(b[k]) <= kSeparation))
      throw Error(Errc::separation_detected,
                  "coefficient " + std::to_string(k) + " diverges (|b| > 30); counts may be all zero or separable",
                  long(k));
}

bool small_change(double delta, double ll, double tol) { return std::abs(delta) <= tol * (1 + std::abs(ll)); }

}  // namespace

Design make_design(const Panel& slice, const std::vector<std::string>& features) {
  std::vector<std::size_t> cols;
  for (const auto& f : features) {
    auto it = std::find(slice.feature_names.begin(), slice.feature_names.end(), f);
    if (it == slice.feature_names.end()) throw Error(Errc::unknown_feature, "unknown feature '" + f + "'");
    cols.push_back(std::size_t(it - slice.feature_names.begin()));
  }
  Design d;
  d.feature_names = features;
  d.x.reserve(slice.size() * cols.size());
  for (const auto& o : slice.observations) {
    for (auto c : cols) d.x.push_back(o.x[c]);
    d.y.push_back(double(o.count));
    d.exposure.push_back(o.exposure);
  }
  return d;
}

double mean_mu(std::span<const double> x, double t, std::span<const double> b) {
  if (!(t > 0)) throw Error(Errc::invalid_argument, "exposure must be positive");
  if (b.size() != x.size() + 1)
    throw Error(Errc::invalid_argument, "coefficient count does not match covariate count");
  double eta = b[0];
  for (std::size_t k = 0; k < x.size(); ++k) eta += b[k + 1] * x[k];
  eta += std::log(t);
  if (!(eta <= kEtaMax)) throw Error(Errc::overflow, "linear predictor exceeds 700");
  return std::exp(eta);
}

double nb2_logpmf(std::int64_t y, double mu, double alpha) {
  if (y < 0) return kNegInf;
  const double yd = double(y);
  if (alpha <= 0) return yd * std::log(mu) - mu - std::lgamma(yd + 1);
  return log_rising(y, alpha) - std::lgamma(yd + 1) + yd * std::log(mu) - (yd + 1 / alpha) * std::log1p(alpha * mu);
}

double nb2_pmf(std::int64_t y, double mu, double alpha) { return std::exp(nb2_logpmf(y, mu, alpha)); }

double nb2_loglik(const Design& d, std::span<const double> b, double alpha) {
  check_design(d, b);
  // Neumaier summation: the optimizer compares totals whose difference is
  // far below the naive rounding error of a few thousand terms
  double sum = 0, comp = 0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double eta = eta_of(d, i, b);
    if (eta > kEtaMax) return kNegInf;
    const double y = d.y[i];
    const double term = alpha <= 0 ? y * eta - std::exp(eta) - std::lgamma(y + 1)
                                    : log_rising(std::int64_t(y), alpha) - std::lgamma(y + 1) + y * eta -
                                          (y + 1 / alpha) * std::log1p(alpha * std::exp(eta));
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double poisson_loglik(const Design& d, std::span<const double> b) { return nb2_loglik(d, b, 0); }

std::vector<double> loglik_gradient(const Design& d, std::span<const double> b, double alpha) {
  check_design(d, b);
  if (!(alpha > 0)) throw Error(Errc::invalid_argument, "alpha must be positive");
  const std::size_t p = d.p();
  std::vector<double> g(p + 2, 0);
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double eta = eta_of(d, i, b);
    if (eta > kEtaMax) throw Error(Errc::overflow, "linear predictor exceeds 700");
    const Terms t = terms(d.y[i], std::exp(eta), alpha, false);
    g[0] += t.g_eta;
    auto r = d.row(i);
    for (std::size_t k = 0; k < p; ++k) g[k + 1] += t.g_eta * r[k];
    g[p + 1] += t.g_theta;
  }
  return g;
}

PoissonFit fit_poisson(const Design& d, const FitOptions& opt) {
  const std::size_t n = d.n(), p = d.p(), m = p + 1;
  if (n < p + 2)
    throw Error(Errc::insufficient_data, "need at least " + std::to_string(p + 2) + " observations, got " +
                                             std::to_string(n));
  const double ysum = std::accumulate(d.y.begin(), d.y.end(), 0.0);
  const double tsum = std::accumulate(d.exposure.begin(), d.exposure.end(), 0.0);
  if (!(ysum > 0)) throw Error(Errc::separation_detected, "all counts are zero; the intercept diverges");

  std::vector<double> b(m, 0);
  b[0] = std::log(ysum / tsum);
  PoissonFit fit;
  double ll = poisson_loglik(d, b);
  int polish = 0;
  bool converged = false;
  for (int it = 1; it <= opt.max_iter + 5; ++it) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(Eigen::Index(m));
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(m));
    Eigen::VectorXd xi(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
      const double mu = std::exp(eta_of(d, i, b));
      xi[0] = 1;
      auto r = d.row(i);
      for (std::size_t k = 0; k < p; ++k) xi[Eigen::Index(k + 1)] = r[k];
      g += (d.y[i] - mu) * xi;
      A.selfadjointView<Eigen::Lower>().rankUpdate(xi, mu);
    }
    A = A.selfadjointView<Eigen::Lower>();
    bool ridged = false;
    const Eigen::VectorXd s = solve_step(A, g, opt.ridge, ridged);
    fit.condition_warning = ridged;
    const double decrement = g.dot(s);

    double step = 1, ll_new = kNegInf;
    std::vector<double> cand(m);
    bool accepted = false;
    for (int h = 0; h < 60; ++h, step /= 2) {
      for (std::size_t k = 0; k < m; ++k) cand[k] = b[k] + step * s[Eigen::Index(k)];
      ll_new = poisson_loglik(d, cand);
      if (ll_new >= ll) {
        accepted = true;
        break;
      }
    }
    fit.iterations = it;
    if (!accepted) {
      converged = converged || small_change(decrement, ll, opt.tol);
      break;
    }
    const double delta = ll_new - ll;
    b = cand;
    ll = ll_new;
    check_separation(b);
    if (converged) {
      if (++polish >= 5 || decrement <= 1e-24 * (1 + std::abs(ll))) break;
    } else if (small_change(delta, ll, opt.tol) && small_change(decrement, ll, opt.tol) &&
               steps_settled(s, b, opt.tol)) {
      converged = true;
    } else if (it >= opt.max_iter) {
      break;
    }
  }
  if (!converged) throw Error(Errc::non_convergence, "Poisson fit did not converge", fit.iterations);
  if (fit.condition_warning) log::warn("design matrix is near-singular; ridge applied to the Poisson fit");
  fit.coefficients = b;
  fit.log_likelihood = ll;
  return fit;
}

AlphaEstimate estimate_alpha_ols(std::span<const double> y, std::span<const double> mu, double alpha_floor) {
  if (y.size() != mu.size()) throw Error(Errc::length_mismatch, "y and mu differ in length");
  if (y.empty()) throw Error(Errc::insufficient_data, "no observations");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(mu[i] > 0)) throw Error(Errc::invalid_argument, "fitted means must be positive");
    const double r = y[i] - mu[i];
    const double z = (r * r - y[i]) / mu[i];
    num += z * mu[i];
    den += mu[i] * mu[i];
  }
  AlphaEstimate a;
  a.raw = num / den;
  if (!(a.raw > alpha_floor)) {
    a.alpha = alpha_floor;
    a.poisson = true;
  } else {
    a.alpha = a.raw;
  }
  return a;
}

Nb2Model fit_nb2(const Design& d, const FitOptions& opt) {
  if (!(opt.tol > 0) || opt.max_iter < 1 || !(opt.alpha_floor > 0))
    throw Error(Errc::invalid_argument, "invalid fit options");
  const PoissonFit pois = fit_poisson(d, opt);
  const std::size_t n = d.n(), p = d.p(), m = p + 2;

  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = std::exp(eta_of(d, i, pois.coefficients));
  const AlphaEstimate a0 = estimate_alpha_ols(d.y, mu, opt.alpha_floor);

  const double theta_floor = std::log(opt.alpha_floor);
  std::vector<double> v(pois.coefficients);
  v.push_back(std::log(a0.alpha));

  auto loglik = [&](const std::vector<double>& w) {
    return nb2_loglik(d, std::span<const double>(w.data(), p + 1), std::exp(w[p + 1]));
  };

  Nb2Model model;
  model.feature_names = d.feature_names;
  auto& diag = model.diagnostics;
  diag.alpha_initial = a0.alpha;
  double ll = loglik(v);
  diag.trace.push_back(ll);

  bool converged = false;
  int polish = 0, it = 0;
  Eigen::VectorXd xi(static_cast<Eigen::Index>(p + 1));
  while (true) {
    ++it;
    const double alpha = std::exp(v[p + 1]);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(Eigen::Index(m));
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Eigen::Index(m), Eigen::Index(m));
    for (std::size_t i = 0; i < n; ++i) {
      const Terms t = terms(d.y[i], std::exp(eta_of(d, i, v)), alpha, true);
      xi[0] = 1;
      auto r = d.row(i);
      for (std::size_t k = 0; k < p; ++k) xi[Eigen::Index(k + 1)] = r[k];
      g.head(Eigen::Index(p + 1)) += t.g_eta * xi;
      g[Eigen::Index(p + 1)] += t.g_theta;
      A.topLeftCorner(Eigen::Index(p + 1), Eigen::Index(p + 1)).selfadjointView<Eigen::Lower>().rankUpdate(xi, -t.h_ee);
      A.block(Eigen::Index(p + 1), 0, 1, Eigen::Index(p + 1)) -= t.h_et * xi.transpose();
      A(Eigen::Index(p + 1), Eigen::Index(p + 1)) -= t.h_tt;
    }
    A = A.selfadjointView<Eigen::Lower>();

    // alpha pinned at the floor while the likelihood still pushes it down
    const bool fixed = v[p + 1] <= theta_floor + 1e-12 && g[Eigen::Index(p + 1)] <= 0;
    const Eigen::Index free = fixed ? Eigen::Index(p + 1) : Eigen::Index(m);
    bool ridged = false;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(Eigen::Index(m));
    s.head(free) = solve_step(A.topLeftCorner(free, free), g.head(free), opt.ridge, ridged);
    diag.condition_warning = ridged;
    const double decrement = g.head(free).dot(s.head(free));

    double step = 1, ll_new = kNegInf;
    std::vector<double> cand(m);
    bool accepted = false;
    for (int h = 0; h < 60; ++h, step /= 2) {
      for (std::size_t k = 0; k < m; ++k) cand[k] = v[k] + step * s[Eigen::Index(k)];
      cand[p + 1] = std::max(cand[p + 1], theta_floor);
      ll_new = loglik(cand);
      if (ll_new >= ll) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      converged = converged || small_change(decrement, ll, opt.tol);
      break;
    }
    const double delta = ll_new - ll;
    v = cand;
    ll = ll_new;
    diag.trace.push_back(ll);
    check_separation(std::span<const double>(v.data(), p + 1));
    if (converged) {
      if (++polish >= 5 || decrement <= 1e-24 * (1 + std::abs(ll))) break;
    } else if (small_change(delta, ll, opt.tol) && small_change(decrement, ll, opt.tol)) {
      converged = true;
    } else if (it >= opt.max_iter) {
      break;
    }
  }
  diag.iterations = it;
  if (!converged) throw Error(Errc::non_convergence, "NB2 fit did not converge", it);
  if (diag.condition_warning) log::warn("Hessian is near-singular; ridge applied to the NB2 fit");

  model.coefficients.assign(v.begin(), v.begin() + std::ptrdiff_t(p + 1));
  model.alpha = std::exp(v[p + 1]);
  if (v[p + 1] <= theta_floor + 1e-12) {
    model.alpha = opt.alpha_floor;
    diag.poisson = true;
  }
  diag.log_likelihood = ll;
  diag.converged = true;
  return model;
}

Nb2Model fit_nb2(const Panel& slice, const std::vector<std::string>& features, const FitOptions& options) {
  Nb2Model m = fit_nb2(make_design(slice, features), options);
  if (!slice.empty()) m.event_type = slice.observations.front().event_type;
  m.period_kind = slice.period_kind;
  return m;
}

std::vector<double> predict(const Nb2Model& model, const FeatureTable& features, double exposure) {
  std::vector<std::size_t> cols;
  for (const auto& f : model.feature_names) {
    auto c = features.feature_index(f);
    if (!c) throw Error(Errc::feature_name_mismatch, "feature '" + f + "' required by the model is missing");
    cols.push_back(*c);
  }
  std::vector<double> out(features.rows());
  std::vector<double> x(cols.size());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) x[k] = features.at(r, cols[k]);
    out[r] = mean_mu(x, exposure, model.coefficients);
  }
  return out;
}

std::vector<double> predict(const Nb2Model& model, const Panel& panel) {
  std::vector<std::size_t> cols;
  for (const auto& f : model.feature_names) {
    auto it = std::find(panel.feature_names.begin(), panel.feature_names.end(), f);
    if (it == panel.feature_names.end())
      throw Error(Errc::feature_name_mismatch, "feature '" + f + "' required by the model is missing");
    cols.push_back(std::size_t(it - panel.feature_names.begin()));
  }
  std::vector<double> out;
  out.reserve(panel.size());
  std::vector<double> x(cols.size());
  for (const auto& o : panel.observations) {
    for (std::size_t k = 0; k < cols.size(); ++k) x[k] = o.x[cols[k]];
    out.push_back(mean_mu(x, o.exposure, model.coefficients));
  }
  return out;
}

}  // namespace ember
