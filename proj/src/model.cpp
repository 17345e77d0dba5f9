// SPDX-License-Identifier: Apache-2.0
#include "qlab/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qlab/kernels.hpp"

namespace qlab {

std::string to_string(FitMethod m) {
  switch (m) {
    case FitMethod::IndependentQR: return "independent";
    case FitMethod::CJQR: return "cjqr";
    case FitMethod::MQGD: return "mqgd";
  }
  return "independent";
}

FitMethod fit_method_from_string(const std::string& s) {
  if (s == "independent") return FitMethod::IndependentQR;
  if (s == "cjqr") return FitMethod::CJQR;
  if (s == "mqgd") return FitMethod::MQGD;
  throw ValidationError("unknown method '" + s +
                        "' (expected independent, cjqr, or mqgd)");
}

void QuantileModel::validate() const {
  if (taus.empty()) throw ValidationError("model has no quantile levels");
  double prev = 0.0;
  for (double t : taus) {
    if (!(t > 0.0 && t < 1.0) || t <= prev) {
      throw ValidationError("model tau grid is not strictly increasing in (0,1)");
    }
    prev = t;
  }
  if (coef.size() != taus.size() * p) {
    throw ValidationError("model coefficient matrix shape mismatch");
  }
  for (double c : coef) {
    if (!std::isfinite(c)) throw ValidationError("non-finite model coefficient");
  }
}

QuantileSheet predict(const QuantileModel& model,
                      const std::vector<double>& x_star) {
  if (x_star.size() != model.p) {
    throw ValidationError("prediction point has " +
                          std::to_string(x_star.size()) +
                          " entries, model expects " + std::to_string(model.p));
  }
  QuantileSheet sheet;
  sheet.x_star = x_star;
  sheet.taus = model.taus;
  sheet.values.resize(model.q());
  const auto& k = kern::active();
  for (std::size_t j = 0; j < model.q(); ++j) {
    sheet.values[j] = k.dot(model.row(j), x_star.data(), model.p);
  }
  return sheet;
}

bool sheet_crossed(const QuantileSheet& sheet, double tol) {
  for (std::size_t j = 0; j + 1 < sheet.values.size(); ++j) {
    if (sheet.values[j] > sheet.values[j + 1] + tol) return true;
  }
  return false;
}

double crossing_rate(const QuantileModel& model,
                     const std::vector<std::vector<double>>& grid,
                     double tol) {
  if (grid.empty()) throw ValidationError("crossing_rate needs a non-empty grid");
  std::size_t crossed = 0;
  for (const auto& x : grid) {
    if (sheet_crossed(predict(model, x), tol)) ++crossed;
  }
  return static_cast<double>(crossed) / static_cast<double>(grid.size());
}

std::vector<std::vector<double>> line_grid(double lo, double hi,
                                           std::size_t count) {
  std::vector<std::vector<double>> grid;
  grid.reserve(count);
  if (count == 1) {
    grid.push_back({1.0, lo});
    return grid;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double x =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    grid.push_back({1.0, x});
  }
  return grid;
}

std::string model_to_json(const QuantileModel& model,
                          const std::string& tool_version,
                          const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["format"] = "qlab-model-v1";
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  j["method"] = to_string(model.method);
  j["intercept"] = model.intercept;
  j["feature_names"] = model.feature_names;
  j["p"] = model.p;
  j["taus"] = model.taus;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < model.q(); ++r) {
    rows.push_back(std::vector<double>(model.row(r), model.row(r) + model.p));
  }
  j["coef"] = rows;
  j["fit_loss"] = model.fit_loss;
  j["seed"] = model.seed;
  return j.dump(2) + "\n";
}

QuantileModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") +
                          e.what());
  }
  if (!j.contains("format") || j["format"] != "qlab-model-v1") {
    throw ValidationError("model file missing format tag 'qlab-model-v1'");
  }
  QuantileModel m;
  try {
    m.method = fit_method_from_string(j.at("method").get<std::string>());
    m.intercept = j.at("intercept").get<bool>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.p = j.at("p").get<std::size_t>();
    m.taus = j.at("taus").get<std::vector<double>>();
    for (const auto& row : j.at("coef")) {
      const auto vals = row.get<std::vector<double>>();
      if (vals.size() != m.p) {
        throw ValidationError("model coefficient row width mismatch");
      }
      m.coef.insert(m.coef.end(), vals.begin(), vals.end());
    }
    m.fit_loss = j.at("fit_loss").get<std::vector<double>>();
    m.seed = j.value("seed", 0LL);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file field error: ") + e.what());
  }
  m.validate();
  return m;
}

void save_model(const std::string& path, const QuantileModel& model,
                const std::string& tool_version,
                const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model file: " + path);
  out << model_to_json(model, tool_version, config_hash);
}

QuantileModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace qlab
