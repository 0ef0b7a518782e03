#include "levelcross/model_config.hpp"

#include <charconv>
#include <string>
#include <vector>

#include "levelcross/errors.hpp"

namespace levelcross {

namespace {

double parse_double(std::string_view s, std::string_view field) {
  std::string buf(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(buf, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != buf.size()) {
    throw Error(ErrorCode::kConfig, std::string(field) + ": cannot parse number '" + buf + "'");
  }
  return v;
}

std::vector<double> parse_list(std::string_view s, std::string_view field) {
  std::vector<double> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    out.push_back(parse_double(s.substr(0, comma), field));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

double require_rho(const nlohmann::json& j, const std::string& name) {
  if (!j.contains("rho") || !j["rho"].is_number()) {
    throw Error(ErrorCode::kConfig, "model." + name + " requires numeric field 'rho'");
  }
  return j["rho"].get<double>();
}

}  // namespace

CovarianceModel model_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_model(j.get<std::string>());
  if (!j.is_object() || !j.contains("model") || !j["model"].is_string()) {
    throw Error(ErrorCode::kConfig, "model: expected object with string field 'model'");
  }
  const auto name = j["model"].get<std::string>();
  try {
    if (name == "independent") return CovarianceModel::independent();
    if (name == "geometric") return CovarianceModel::geometric(require_rho(j, name));
    if (name == "constant") return CovarianceModel::constant(require_rho(j, name));
    if (name == "raised_cosine") {
      return CovarianceModel::raised_cosine(j.contains("rho") ? require_rho(j, name) : 0.5);
    }
    if (name == "custom_fourier") {
      if (!j.contains("gamma") || !j["gamma"].is_array()) {
        throw Error(ErrorCode::kConfig, "model.custom_fourier requires array field 'gamma'");
      }
      return CovarianceModel::custom_fourier(j["gamma"].get<std::vector<double>>());
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, "model: " + std::string(e.what()));
  }
  throw Error(ErrorCode::kConfig, "model: unknown family '" + name + "'");
}

nlohmann::json model_to_json(const CovarianceModel& m) {
  const std::string& label = m.label();
  const auto colon = label.find(':');
  nlohmann::json j;
  j["model"] = label.substr(0, colon);
  if (m.kind() == ModelKind::kConstantRho || label.rfind("geometric", 0) == 0 ||
      label.rfind("raised_cosine", 0) == 0) {
    j["rho"] = m.rho();
  }
  if (label == "custom_fourier") {
    std::vector<double> gamma;
    // custom_fourier has finite support; report up to the last nonzero lag.
    const auto full = m.covariance(4096);
    const auto last = full.effective_lag(0.0);
    for (std::size_t k = 0; k <= last; ++k) gamma.push_back(full(static_cast<std::ptrdiff_t>(k)));
    j["gamma"] = gamma;
  }
  return j;
}

CovarianceModel parse_model(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  nlohmann::json j;
  j["model"] = std::string(name);
  if (name == "custom_fourier") {
    j["gamma"] = parse_list(arg, "model");
  } else if (!arg.empty()) {
    j["rho"] = parse_double(arg, "model");
  }
  return model_from_json(j);
}

}  // namespace levelcross
