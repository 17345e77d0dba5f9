// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlab/dataset.hpp"
#include "qlab/isotonize.hpp"
#include "qlab/model.hpp"

namespace qlab::sgp {

// Raised when a score is requested on a crossed sheet under the
// require-monotone policy. Carries the first adjacent pair that violates
// the ordering so callers can report where the sheet breaks down.
class CrossingError : public std::runtime_error {
 public:
  CrossingError(std::size_t pair_index, double lower, double upper);

  std::size_t pair_index;  // k of the first pair with values[k] > values[k+1]
  double lower;            // values[k]
  double upper;            // values[k+1]
};

// What to do with a crossed sheet before scoring.
enum class Policy {
  RequireMonotone,  // refuse: throw CrossingError
  Rearrange,        // auto-correct by ascending rearrangement
  Pav,              // auto-correct by isotonic projection
};

std::string to_string(Policy policy);
Policy policy_from_string(const std::string& name);

struct SgpScore {
  double tau_hat = 0.0;
  std::size_t bracket = 0;  // k of the interpolation interval used
  bool clamped = false;     // y* fell outside the knot span
};

// Percentile assignment by linear interpolation between adjacent knots.
//
// Finds the smallest k with values[k] <= y* <= values[k+1] and
// interpolates tau linearly on that interval. Equal knots spanning y*
// resolve to the lower tau. Values of y* outside [values.front(),
// values.back()] clamp to the boundary tau with clamped=true.
SgpScore assign_sgp(const QuantileSheet& sheet, double y_star, Policy policy);

struct SgpRow {
  std::size_t student = 0;
  SgpScore score;
  bool scored = true;   // false when require-monotone refused the row
  bool crossed = false; // the raw sheet violated ordering before correction
};

struct BatchSummary {
  std::size_t n = 0;
  std::size_t n_crossed = 0;
  double crossing_frequency = 0.0;
  double max_violation = 0.0;  // largest values[k] - values[k+1] seen
  std::size_t n_clamped = 0;
  std::size_t n_errors = 0;    // rows refused under require-monotone
};

struct BatchResult {
  std::vector<SgpRow> rows;
  BatchSummary summary;
};

// Scores every row of `students` against its own predicted sheet. The
// response column holds the observed outcome y*. Rows are independent and
// are evaluated in parallel; the summary is aggregated in row order.
//
// Under require-monotone a crossed row is counted and left unscored
// rather than aborting the batch.
BatchResult sgp_batch(const QuantileModel& model, const Dataset& students,
                      const TauGrid& taus, Policy policy);

// Feeds the model's own predicted quantile values back through
// assignment and returns max_j |tau_hat_j - tau_j|. Zero (to rounding)
// for strictly increasing sheets; degenerate flat knots surface here as
// discrepancies up to the tau span.
double percentile_roundtrip(const QuantileModel& model,
                            const std::vector<double>& x_star,
                            iso::Correction method = iso::Correction::Rearrange);

// Conventional 1-99 integer score: round(100 * tau_hat) clipped to
// [1, 99]. Report-layer convenience; the core stays on the tau scale.
int sgp_1_99(double tau_hat);

// Columns: student,tau_hat,sgp_1_99,clamped,crossed_before_correction.
// Unscored rows write nan for the score columns.
void write_sgp_csv(const std::string& path, const BatchResult& result);

std::string summary_to_json(const BatchSummary& summary);

}  // namespace qlab::sgp
