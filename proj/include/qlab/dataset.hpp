// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlab {

// Bad or inconsistent user input (files, flags, dimensions, parameter
// ranges). The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure inside a solver or trainer. CLI exit code 3.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Design matrix plus response. Row-major storage; when built with an
// intercept the first column is all ones and counted in p.
struct Dataset {
  std::size_t n = 0;
  std::size_t p = 0;
  std::vector<double> x;  // n*p, row-major
  std::vector<double> y;  // n
  std::vector<std::string> feature_names;
  bool intercept = false;

  double xat(std::size_t i, std::size_t k) const { return x[i * p + k]; }
  const double* row(std::size_t i) const { return x.data() + i * p; }

  // Throws ValidationError on shape or finiteness problems.
  void validate() const;
};

// Strictly increasing quantile levels in (0,1).
struct TauGrid {
  std::vector<double> taus;

  explicit TauGrid(std::vector<double> t);
  std::size_t size() const { return taus.size(); }
  double operator[](std::size_t j) const { return taus[j]; }

  // The conventional percentile grid 0.01..0.99.
  static TauGrid percentile_grid();
};

// Builds a Dataset from columns; prepends the ones column when intercept
// is set. feature_values is column-major: one vector per feature.
Dataset make_dataset(const std::vector<std::vector<double>>& feature_values,
                     const std::vector<double>& response,
                     const std::vector<std::string>& feature_names,
                     bool intercept);

// RFC-4180-style CSV with a header row, '.' decimal separator.
// response_column names the y column; every other column becomes a
// feature in file order. A header-only file is an error unless
// allow_empty is set, in which case an n=0 dataset comes back.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 bool intercept, bool allow_empty = false);

// Writes features and response back to CSV with 12 significant digits.
// The intercept column, if present, is not written.
void write_csv(const std::string& path, const Dataset& ds,
               const std::string& response_column);

// The bundled 20-observation growth sample (prior score x, current
// score y) used by the reproduce pipeline, with intercept column.
Dataset reference_dataset();

}  // namespace qlab
