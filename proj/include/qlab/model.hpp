// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qlab/dataset.hpp"

namespace qlab {

enum class FitMethod { IndependentQR, CJQR, MQGD };

std::string to_string(FitMethod m);
FitMethod fit_method_from_string(const std::string& s);

// q fitted coefficient rows, one per tau.
struct QuantileModel {
  std::vector<double> taus;       // strictly increasing
  std::size_t p = 0;              // coefficients per row
  std::vector<double> coef;       // q*p, row-major; row j = beta(tau_j)
  std::vector<double> fit_loss;   // per-tau pinball objective on training data
  FitMethod method = FitMethod::IndependentQR;
  bool intercept = false;
  std::vector<std::string> feature_names;
  long long seed = 0;             // meaningful for MQGD only

  std::size_t q() const { return taus.size(); }
  const double* row(std::size_t j) const { return coef.data() + j * p; }
  double* row(std::size_t j) { return coef.data() + j * p; }

  void validate() const;
};

// Predicted quantile values at one evaluation point.
struct QuantileSheet {
  std::vector<double> x_star;  // p entries
  std::vector<double> values;  // q entries, values[j] = prediction at tau_j
  std::vector<double> taus;
  bool isotonized = false;
};

// values[j] = x_star . coef[j]
QuantileSheet predict(const QuantileModel& model,
                      const std::vector<double>& x_star);

// True when some adjacent pair violates values[j] <= values[j+1] + tol.
bool sheet_crossed(const QuantileSheet& sheet, double tol = 1e-9);

// Fraction of grid points whose predicted sheet has an adjacent-pair
// violation larger than tol. Each grid entry is a full p-vector.
double crossing_rate(const QuantileModel& model,
                     const std::vector<std::vector<double>>& grid,
                     double tol = 1e-9);

// Builds p-vectors (1, x) over an inclusive linear grid; convenience for
// the single-covariate-plus-intercept case.
std::vector<std::vector<double>> line_grid(double lo, double hi,
                                           std::size_t count);

// JSON model file round-trip (full double precision, no timestamps).
std::string model_to_json(const QuantileModel& model,
                          const std::string& tool_version,
                          const std::string& config_hash);
QuantileModel model_from_json(const std::string& text);
void save_model(const std::string& path, const QuantileModel& model,
                const std::string& tool_version,
                const std::string& config_hash);
QuantileModel load_model(const std::string& path);

}  // namespace qlab
