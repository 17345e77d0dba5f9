// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "qlab/dataset.hpp"
#include "qlab/lp.hpp"
#include "qlab/model.hpp"

namespace qlab::cjqr {

// Size of the joint formulation in problem terms: q*p coefficients plus
// 2nq signed residual parts; nq equality rows; n(q-1) ordering
// inequalities (the solver adds one slack per inequality internally).
struct JointLpStats {
  std::size_t n_vars = 0;
  std::size_t n_eq = 0;
  std::size_t n_ineq = 0;
  double solve_seconds = 0.0;
  std::size_t lp_iterations = 0;
};

struct JointFit {
  QuantileModel model;
  JointLpStats stats;
  double objective = 0.0;  // sum over taus of pinball objectives
};

// One LP over all quantile levels with explicit non-crossing
// constraints at every training row. Throws ValidationError when the
// instance exceeds max_lp_vars (tractability guard).
JointFit fit_joint(const Dataset& ds, const TauGrid& taus,
                   const lp::LpOptions& opts = {},
                   std::size_t max_lp_vars = 200000);

struct ViolationReport {
  std::size_t count = 0;
  double max_magnitude = 0.0;
  std::size_t worst_row = 0;   // dataset row of the largest violation
  std::size_t worst_pair = 0;  // lower index j of the violating (j, j+1)
};

// Exhaustive check of x_i . beta(tau_j) <= x_i . beta(tau_j+1) + tol
// over all training rows and adjacent pairs.
ViolationReport verify_noncrossing(const QuantileModel& model,
                                   const Dataset& ds, double tol = 1e-9);

}  // namespace qlab::cjqr
