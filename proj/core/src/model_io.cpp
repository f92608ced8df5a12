#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ember/csv.hpp"
#include "ember/error.hpp"
#include "ember/nb2.hpp"

namespace ember {

using nlohmann::ordered_json;

std::string model_to_json(const Nb2Model& model) {
  ordered_json j;
  j["schema_version"] = 1;
  if (model.event_type) j["event_type"] = std::string(to_string(*model.event_type));
  if (model.period_kind) j["period_kind"] = std::string(to_string(*model.period_kind));
  j["feature_names"] = model.feature_names;
  j["coefficients"] = model.coefficients;
  j["alpha"] = model.alpha;
  const auto& d = model.diagnostics;
  j["diagnostics"] = {{"log_likelihood", d.log_likelihood},
                      {"iterations", d.iterations},
                      {"converged", d.converged},
                      {"condition_warning", d.condition_warning},
                      {"poisson", d.poisson},
                      {"alpha_initial", d.alpha_initial}};
  return j.dump(2) + "\n";
}

Nb2Model model_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw Error(Errc::parse, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
      throw Error(Errc::schema_version, "unsupported model schema_version (expected 1)");
    Nb2Model m;
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.alpha = j.at("alpha").get<double>();
    if (m.coefficients.size() != m.feature_names.size() + 1)
      throw Error(Errc::parse, "model has " + std::to_string(m.coefficients.size()) + " coefficients for " +
                                   std::to_string(m.feature_names.size()) + " features");
    if (!(m.alpha >= 0)) throw Error(Errc::parse, "model alpha must be non-negative");
    if (j.contains("event_type")) {
      auto t = parse_event_type(j.at("event_type").get<std::string>());
      if (!t) throw Error(Errc::unknown_event_type, "unknown event_type in model");
      m.event_type = *t;
    }
    if (j.contains("period_kind")) {
      auto k = parse_period_kind(j.at("period_kind").get<std::string>());
      if (!k) throw Error(Errc::parse, "unknown period_kind in model");
      m.period_kind = *k;
    }
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      m.diagnostics.log_likelihood = d.value("log_likelihood", 0.0);
      m.diagnostics.iterations = d.value("iterations", 0);
      m.diagnostics.converged = d.value("converged", false);
      m.diagnostics.condition_warning = d.value("condition_warning", false);
      m.diagnostics.poisson = d.value("poisson", false);
      m.diagnostics.alpha_initial = d.value("alpha_initial", 0.0);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("malformed model file: ") + e.what());
  }
}

void write_model(const std::filesystem::path& path, const Nb2Model& model) {
  csv::write_file_atomic(path, model_to_json(model));
}

Nb2Model read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace ember
