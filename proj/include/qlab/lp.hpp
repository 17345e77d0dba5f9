// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace qlab::lp {

// Equality-form linear program: min cost.x subject to A x = b, x >= 0.
// Columns are stored sparse as (row, value) lists. Callers split free
// variables into differences of nonnegative pairs before assembly.
struct LinearProgram {
  std::size_t n_vars = 0;
  std::size_t n_rows = 0;
  std::vector<double> cost;                                  // n_vars
  std::vector<std::vector<std::pair<int, double>>> cols;     // n_vars lists
  std::vector<double> b;                                     // n_rows

  void add_entry(std::size_t var, std::size_t row, double value) {
    cols[var].push_back({static_cast<int>(row), value});
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpOptions {
  // 0 means the default 50 * (n_rows + n_vars).
  std::size_t max_iters = 0;
  double pivot_tol = 1e-9;
  // Consecutive degenerate pivots before Bland's rule takes over;
  // 0 means the default 3 * (n_rows + n_vars).
  std::size_t bland_after = 0;
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  LpStatus status = LpStatus::Infeasible;
  std::size_t iterations = 0;
  std::vector<double> dual;        // row multipliers from the final basis
  double max_primal_resid = 0.0;   // ||Ax - b||_inf after refinement
};

// Two-phase primal simplex with an explicitly maintained basis inverse,
// Dantzig pricing, and Bland's anti-cycling rule under sustained
// degeneracy. Deterministic: identical inputs give identical pivot
// sequences and solutions.
LpSolution solve(const LinearProgram& prob, const LpOptions& opts = {});

}  // namespace qlab::lp
