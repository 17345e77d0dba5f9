// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qlab/dataset.hpp"
#include "qlab/model.hpp"

namespace qlab::bench {

// Deterministic synthetic regression data for scaling runs.
//
// Column 1 (after the intercept) is x ~ U[0,10]; additional columns are
// independent U[0,10] draws. The response is
//   y = 2.0 + 0.3 x + sum_k 0.05 x_k + (0.5 + 0.15 x) eps
// with eps standard normal from a polar Box-Muller transform driven by a
// seeded mt19937. Same arguments, same bytes, on any platform.
Dataset synth(std::size_t n, std::size_t p, std::uint32_t seed);

struct ScalingCell {
  std::string method;
  std::size_t n = 0;
  std::size_t q = 0;
  double seconds = 0.0;           // median over repeats, warmup discarded
  double per_iter_seconds = 0.0;  // seconds / iterations (gradient trainer)
  double objective = 0.0;
  std::size_t iterations = 0;
  bool skipped = false;  // guard refused the cell
  bool sane = true;      // method-specific optimality check held
  std::string note;
};

struct ScalingOptions {
  std::size_t repeats = 3;
  std::size_t gradient_iters = 50;  // fixed iteration budget for mqgd cells
  std::uint32_t seed = 1;
};

// Times one fit per (n, q) cell of the cross product. Cells run
// sequentially; each cell does a discarded warmup fit, then `repeats`
// timed fits, and records the median wall-clock seconds. Guard
// violations produce skipped cells, not failures. Each cell also
// re-checks the method's optimality invariant on the fitted model
// (sign condition for independent fits, ordering for joint fits,
// monotone loss for the gradient trainer).
std::vector<ScalingCell> scaling_run(FitMethod method,
                                     const std::vector<std::size_t>& n_list,
                                     const std::vector<std::size_t>& q_list,
                                     const ScalingOptions& opts = {});

// Least-squares slope of log(y) against log(x). Pairs with a nonpositive
// coordinate are dropped; fewer than two usable pairs give 0.
double loglog_slope(const std::vector<double>& xs,
                    const std::vector<double>& ys);

// Columns: method,n,q,seconds,per_iter_seconds,objective,iterations,
// skipped,sane.
void write_scaling_csv(const std::string& path,
                       const std::vector<ScalingCell>& cells);

// Human-readable table plus per-method log-log slopes in n and q.
std::string summarize(const std::vector<ScalingCell>& cells);

}  // namespace qlab::bench
