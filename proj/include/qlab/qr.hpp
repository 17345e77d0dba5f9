// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "qlab/dataset.hpp"
#include "qlab/lp.hpp"
#include "qlab/model.hpp"

namespace qlab::qr {

// Check loss: u * (tau - [u < 0]). Throws ValidationError for tau
// outside (0,1).
double pinball(double u, double tau);

// Sum of pinball losses of the residuals y - X beta.
double objective(const Dataset& ds, const std::vector<double>& beta,
                 double tau);

struct SingleFit {
  std::vector<double> beta;
  double objective = 0.0;
  std::size_t lp_iterations = 0;
};

// Minimizes the pinball objective through the equality-form LP with
// split coefficients and signed residual parts.
SingleFit fit_single(const Dataset& ds, double tau,
                     const lp::LpOptions& opts = {});

// One fit_single per tau; rows are fully decoupled and may run on
// several threads (results are identical to sequential execution).
QuantileModel fit_independent(const Dataset& ds, const TauGrid& taus,
                              const lp::LpOptions& opts = {});

// Exhaustive optimality reference exploiting the basic-solution
// property: some optimal hyperplane passes through p data points.
// Guarded to p <= 3, n <= 200. Objective ties within 1e-12 are broken
// by the lexicographically smallest coefficient vector.
SingleFit brute_force_oracle(const Dataset& ds, double tau);

}  // namespace qlab::qr
