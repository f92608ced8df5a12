#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ember/event_type.hpp"
#include "ember/feature_table.hpp"
#include "ember/panel.hpp"

namespace ember {

struct FitOptions {
  double tol = 1e-8;  // relative log-likelihood change
  int max_iter = 100;
  double alpha_floor = 1e-8;
  double ridge = 1e-8;
};

struct Nb2Diagnostics {
  double log_likelihood = 0;
  int iterations = 0;
  bool converged = false;
  bool condition_warning = false;
  bool poisson = false;  // alpha ended at the floor
  double alpha_initial = 0;
  /// Log-likelihood after every accepted step, starting at the initializer.
  std::vector<double> trace;
};

struct Nb2Model {
  std::vector<std::string> feature_names;
  std::vector<double> coefficients;  // intercept first
  double alpha = 0;
  Nb2Diagnostics diagnostics;
  std::optional<EventType> event_type;
  std::optional<PeriodKind> period_kind;
};

/// Count regression data: row-major covariates (no intercept column), counts
/// and exposures.
struct Design {
  std::vector<std::string> feature_names;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> exposure;

  std::size_t n() const { return y.size(); }
  std::size_t p() const { return feature_names.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * p(), p()}; }
};

/// Observations of `slice` (all of one event type), with columns picked by
/// name. Throws Error(unknown_feature).
Design make_design(const Panel& slice, const std::vector<std::string>& features);

/// t * exp(b0 + sum b_k x_k). Throws Error(overflow) when the linear
/// predictor exceeds 700, Error(invalid_argument) on t <= 0 or a length
/// mismatch.
double mean_mu(std::span<const double> x, double t, std::span<const double> b);

/// NB2 probability with variance mu + alpha mu^2; alpha == 0 is Poisson.
double nb2_logpmf(std::int64_t y, double mu, double alpha);
double nb2_pmf(std::int64_t y, double mu, double alpha);

double nb2_loglik(const Design& d, std::span<const double> b, double alpha);
double poisson_loglik(const Design& d, std::span<const double> b);

/// d loglik / d(b, ln alpha); the last entry is the ln alpha component.
std::vector<double> loglik_gradient(const Design& d, std::span<const double> b, double alpha);

struct PoissonFit {
  std::vector<double> coefficients;
  double log_likelihood = 0;
  int iterations = 0;
  bool condition_warning = false;
};

/// Newton iterations with log-exposure offset. Errors: InsufficientData
/// (fewer than p + 2 rows), NonConvergence, SeparationDetected (|b_k| > 30).
PoissonFit fit_poisson(const Design& d, const FitOptions& options = {});

struct AlphaEstimate {
  double alpha = 0;
  double raw = 0;
  bool poisson = false;
};

/// No-intercept regression of ((y - mu)^2 - y) / mu on mu.
AlphaEstimate estimate_alpha_ols(std::span<const double> y, std::span<const double> mu, double alpha_floor = 1e-8);

/// Poisson fit, OLS alpha, then joint Newton ascent on (b, ln alpha) with
/// step halving.
Nb2Model fit_nb2(const Design& d, const FitOptions& options = {});
Nb2Model fit_nb2(const Panel& slice, const std::vector<std::string>& features, const FitOptions& options = {});

/// Expected counts per table row. Throws Error(feature_name_mismatch) when a
/// model feature is absent.
std::vector<double> predict(const Nb2Model& model, const FeatureTable& features, double exposure = 1.0);
/// Expected count per observation of `panel`.
std::vector<double> predict(const Nb2Model& model, const Panel& panel);

/// JSON with `schema_version: 1`; floats use shortest round-trip decimals.
std::string model_to_json(const Nb2Model& model);
/// Throws Error(schema_version) or Error(parse).
Nb2Model model_from_json(std::string_view text);
void write_model(const std::filesystem::path& path, const Nb2Model& model);
Nb2Model read_model(const std::filesystem::path& path);

}  // namespace ember
