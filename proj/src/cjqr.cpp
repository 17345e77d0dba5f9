// SPDX-License-Identifier: Apache-2.0
#include "qlab/cjqr.hpp"

#include <chrono>
#include <cmath>

#include "qlab/kernels.hpp"
#include "qlab/qr.hpp"

namespace qlab::cjqr {

// Variable layout: [beta+ (qp), beta- (qp), u+ (nq), u- (nq), s (n(q-1))].
// Equality row (j, i): x_i beta_j+ - x_i beta_j- + u+_{ji} - u-_{ji} = y_i.
// Ordering row (j, i): x_i beta_j - x_i beta_{j+1} + s_{ji} = 0.
JointFit fit_joint(const Dataset& ds, const TauGrid& taus,
                   const lp::LpOptions& opts, std::size_t max_lp_vars) {
  ds.validate();
  const std::size_t q = taus.size();
  if (q < 2) {
    throw ValidationError("joint fit needs at least two quantile levels");
  }
  const std::size_t n = ds.n, p = ds.p;
  const std::size_t qp = q * p;
  const std::size_t total_vars = 2 * qp + 2 * n * q + n * (q - 1);
  if (total_vars > max_lp_vars) {
    throw ValidationError(
        "joint LP size guard: " + std::to_string(total_vars) +
        " variables exceed the cap of " + std::to_string(max_lp_vars));
  }

  lp::LinearProgram prob;
  prob.n_vars = total_vars;
  prob.n_rows = n * q + n * (q - 1);
  prob.cost.assign(prob.n_vars, 0.0);
  prob.cols.resize(prob.n_vars);
  prob.b.assign(prob.n_rows, 0.0);

  const std::size_t off_bm = qp;            // beta- block
  const std::size_t off_up = 2 * qp;        // u+ block
  const std::size_t off_um = 2 * qp + n * q;  // u- block
  const std::size_t off_s = 2 * qp + 2 * n * q;
  const std::size_t off_ineq_rows = n * q;

  for (std::size_t j = 0; j < q; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t row = j * n + i;
      prob.b[row] = ds.y[i];
      for (std::size_t k = 0; k < p; ++k) {
        const double v = ds.xat(i, k);
        if (v != 0.0) {
          prob.add_entry(j * p + k, row, v);
          prob.add_entry(off_bm + j * p + k, row, -v);
        }
      }
      prob.add_entry(off_up + j * n + i, row, 1.0);
      prob.add_entry(off_um + j * n + i, row, -1.0);
      prob.cost[off_up + j * n + i] = taus[j];
      prob.cost[off_um + j * n + i] = 1.0 - taus[j];
    }
  }
  for (std::size_t j = 0; j + 1 < q; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t row = off_ineq_rows + j * n + i;
      for (std::size_t k = 0; k < p; ++k) {
        const double v = ds.xat(i, k);
        if (v != 0.0) {
          prob.add_entry(j * p + k, row, v);
          prob.add_entry(off_bm + j * p + k, row, -v);
          prob.add_entry((j + 1) * p + k, row, -v);
          prob.add_entry(off_bm + (j + 1) * p + k, row, v);
        }
      }
      prob.add_entry(off_s + j * n + i, row, 1.0);
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  const lp::LpSolution sol = lp::solve(prob, opts);
  const auto t1 = std::chrono::steady_clock::now();
  if (sol.status != lp::LpStatus::Optimal) {
    throw SolverError("joint quantile LP did not reach optimality (status " +
                      std::to_string(static_cast<int>(sol.status)) + ")");
  }

  JointFit out;
  out.stats.n_vars = qp + 2 * n * q;
  out.stats.n_eq = n * q;
  out.stats.n_ineq = n * (q - 1);
  out.stats.solve_seconds =
      std::chrono::duration<double>(t1 - t0).count();
  out.stats.lp_iterations = sol.iterations;

  QuantileModel& model = out.model;
  model.taus = taus.taus;
  model.p = p;
  model.coef.resize(qp);
  model.fit_loss.resize(q);
  model.method = FitMethod::CJQR;
  model.intercept = ds.intercept;
  model.feature_names = ds.feature_names;
  for (std::size_t j = 0; j < q; ++j) {
    for (std::size_t k = 0; k < p; ++k) {
      model.coef[j * p + k] = sol.x[j * p + k] - sol.x[off_bm + j * p + k];
    }
    model.fit_loss[j] = qr::objective(
        ds, std::vector<double>(model.row(j), model.row(j) + p), taus[j]);
  }
  out.objective = sol.objective;
  return out;
}

ViolationReport verify_noncrossing(const QuantileModel& model,
                                   const Dataset& ds, double tol) {
  if (model.p != ds.p) {
    throw ValidationError("model and dataset disagree on column count");
  }
  ViolationReport rep;
  const auto& k = kern::active();
  for (std::size_t i = 0; i < ds.n; ++i) {
    double prev = k.dot(model.row(0), ds.row(i), ds.p);
    for (std::size_t j = 1; j < model.q(); ++j) {
      const double cur = k.dot(model.row(j), ds.row(i), ds.p);
      const double gap = prev - cur;  // positive means a violation
      if (gap > tol) {
        ++rep.count;
        if (gap > rep.max_magnitude) {
          rep.max_magnitude = gap;
          rep.worst_row = i;
          rep.worst_pair = j - 1;
        }
      }
      prev = cur;
    }
  }
  return rep;
}

}  // namespace qlab::cjqr
