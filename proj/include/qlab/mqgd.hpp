// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qlab/dataset.hpp"
#include "qlab/model.hpp"

namespace qlab::mqgd {

enum class Optimizer { QuasiNewton, FirstOrderWithSchedule };

struct MqgdConfig {
  std::size_t hidden_units = 0;  // 0 = pure linear multi-output
  std::size_t max_iters = 10000;
  std::size_t patience = 500;
  double min_improvement = 1e-8;
  long long seed = 42;
  Optimizer optimizer = Optimizer::QuasiNewton;
  double learning_rate = 0.01;  // first-order only

  void validate() const;
};

enum class StopReason { Plateau, MaxIters, GradientTolerance };

std::string to_string(StopReason r);

struct TrainingTrace {
  std::vector<double> loss_history;  // initial loss plus one entry per iteration
  std::size_t stopped_at = 0;
  StopReason stop_reason = StopReason::MaxIters;
};

// Flat parameter vector. Linear case: q rows of p coefficients.
// With hidden units h: [W1 (h x p), heads (q x (h+1))], softplus
// activation between the layers.
struct Params {
  std::size_t p = 0, q = 0, hidden = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  static Params shaped(std::size_t p, std::size_t q, std::size_t hidden);
};

// Mean composite pinball loss (1/n) sum_i sum_j rho_tau_j(y_i - f_j(x_i)).
double composite_loss(const Params& params, const Dataset& ds,
                      const TauGrid& taus);

// A subgradient of composite_loss; residuals exactly at zero take the
// tau-side slope.
std::vector<double> subgradient(const Params& params, const Dataset& ds,
                                const TauGrid& taus);

struct FitResult {
  QuantileModel model;   // linear case: trained rows; hidden case: the
                         // equivalent predictions are in `params`
  Params params;
  TrainingTrace trace;
  double final_loss = 0.0;
};

// Full-batch training. The quasi-Newton path (default) is a
// limited-memory BFGS with identity seed matrix, monotone backtracking
// line search, and step rejection: a step is only accepted when it
// improves the best loss by min_improvement, so the loss history is
// non-increasing. Stops on plateau (patience iterations without a new
// best), sup-norm gradient below 1e-12, or max_iters. Deterministic
// given the config.
FitResult fit(const Dataset& ds, const TauGrid& taus, const MqgdConfig& cfg);

// Evaluate a trained parameter set at one point. Works for both the
// linear case and hidden networks; the result has one value per tau.
std::vector<double> predict_net(const Params& params,
                                const std::vector<double>& x_star);

// Writes "iteration,loss" rows.
void export_trace_csv(const std::string& path, const TrainingTrace& trace);

}  // namespace qlab::mqgd
