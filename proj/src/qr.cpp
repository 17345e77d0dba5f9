// SPDX-License-Identifier: Apache-2.0
#include "qlab/qr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qlab/kernels.hpp"
#include "qlab/parallel.hpp"

namespace qlab::qr {

double pinball(double u, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ValidationError("tau " + std::to_string(tau) +
                          " outside the open interval (0,1)");
  }
  return u * (tau - (u < 0.0 ? 1.0 : 0.0));
}

double objective(const Dataset& ds, const std::vector<double>& beta,
                 double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ValidationError("tau outside the open interval (0,1)");
  }
  if (beta.size() != ds.p) {
    throw ValidationError("coefficient vector length does not match dataset");
  }
  std::vector<double> resid(ds.n);
  const auto& k = kern::active();
  for (std::size_t i = 0; i < ds.n; ++i) {
    resid[i] = ds.y[i] - k.dot(ds.row(i), beta.data(), ds.p);
  }
  return k.pinball_sum(resid.data(), ds.n, tau);
}

// LP layout: [beta+ (p), beta- (p), u+ (n), u- (n)], one equality row
// per observation: X beta+ - X beta- + u+ - u- = y.
SingleFit fit_single(const Dataset& ds, double tau, const lp::LpOptions& opts) {
  ds.validate();
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ValidationError("tau outside the open interval (0,1)");
  }
  const std::size_t p = ds.p, n = ds.n;
  lp::LinearProgram prob;
  prob.n_vars = 2 * p + 2 * n;
  prob.n_rows = n;
  prob.cost.assign(prob.n_vars, 0.0);
  prob.cols.resize(prob.n_vars);
  prob.b = ds.y;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      const double v = ds.xat(i, k);
      if (v != 0.0) {
        prob.add_entry(k, i, v);
        prob.add_entry(p + k, i, -v);
      }
    }
    prob.add_entry(2 * p + i, i, 1.0);
    prob.add_entry(2 * p + n + i, i, -1.0);
    prob.cost[2 * p + i] = tau;
    prob.cost[2 * p + n + i] = 1.0 - tau;
  }
  const lp::LpSolution sol = lp::solve(prob, opts);
  if (sol.status != lp::LpStatus::Optimal) {
    throw SolverError("quantile LP did not reach optimality at tau " +
                      std::to_string(tau) + " (status " +
                      std::to_string(static_cast<int>(sol.status)) + ")");
  }
  SingleFit fit;
  fit.beta.resize(p);
  for (std::size_t k = 0; k < p; ++k) fit.beta[k] = sol.x[k] - sol.x[p + k];
  fit.objective = sol.objective;
  fit.lp_iterations = sol.iterations;
  return fit;
}

QuantileModel fit_independent(const Dataset& ds, const TauGrid& taus,
                              const lp::LpOptions& opts) {
  ds.validate();
  QuantileModel model;
  model.taus = taus.taus;
  model.p = ds.p;
  model.coef.assign(taus.size() * ds.p, 0.0);
  model.fit_loss.assign(taus.size(), 0.0);
  model.method = FitMethod::IndependentQR;
  model.intercept = ds.intercept;
  model.feature_names = ds.feature_names;
  std::vector<std::string> errors(taus.size());
  parallel_for(taus.size(), [&](std::size_t j) {
    try {
      const SingleFit fit = fit_single(ds, taus[j], opts);
      std::copy(fit.beta.begin(), fit.beta.end(), model.row(j));
      model.fit_loss[j] = fit.objective;
    } catch (const std::exception& e) {
      errors[j] = std::string("tau ") + std::to_string(taus[j]) + ": " +
                  e.what();
    }
  });
  for (const auto& err : errors) {
    if (!err.empty()) throw SolverError(err);
  }
  return model;
}

namespace {

// Solves the p x p system through the given row subset; returns false
// when the subset does not define a unique hyperplane.
bool solve_through_points(const Dataset& ds, const std::vector<std::size_t>& idx,
                          std::vector<double>& beta) {
  const std::size_t p = ds.p;
  std::vector<double> a(p * p);
  std::vector<double> rhs(p);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = 0; c < p; ++c) a[r * p + c] = ds.xat(idx[r], c);
    rhs[r] = ds.y[idx[r]];
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    double best = std::fabs(a[c * p + c]);
    for (std::size_t r = c + 1; r < p; ++r) {
      const double v = std::fabs(a[r * p + c]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-12) return false;
    if (piv != c) {
      for (std::size_t t = 0; t < p; ++t) std::swap(a[piv * p + t], a[c * p + t]);
      std::swap(rhs[piv], rhs[c]);
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[r * p + c] / a[c * p + c];
      if (f != 0.0) {
        for (std::size_t t = c; t < p; ++t) a[r * p + t] -= f * a[c * p + t];
        rhs[r] -= f * rhs[c];
      }
    }
  }
  beta.resize(p);
  for (std::size_t c = 0; c < p; ++c) beta[c] = rhs[c] / a[c * p + c];
  return true;
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

SingleFit brute_force_oracle(const Dataset& ds, double tau) {
  ds.validate();
  if (ds.p > 3 || ds.n > 200) {
    throw ValidationError("oracle guard: requires p <= 3 and n <= 200");
  }
  const std::size_t p = ds.p, n = ds.n;
  SingleFit best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(p);
  std::vector<double> beta;
  for (std::size_t k = 0; k < p; ++k) idx[k] = k;
  const auto next_combination = [&]() {
    std::size_t k = p;
    while (k-- > 0) {
      if (idx[k] < n - p + k) {
        ++idx[k];
        for (std::size_t t = k + 1; t < p; ++t) idx[t] = idx[t - 1] + 1;
        return true;
      }
    }
    return false;
  };
  do {
    if (!solve_through_points(ds, idx, beta)) continue;
    const double obj = objective(ds, beta, tau);
    if (obj < best.objective - 1e-12) {
      best.objective = obj;
      best.beta = beta;
    } else if (obj < best.objective + 1e-12 && !best.beta.empty() &&
               lex_less(beta, best.beta)) {
      best.objective = std::min(best.objective, obj);
      best.beta = beta;
    }
  } while (next_combination());
  if (best.beta.empty()) {
    // every subset was rank-deficient (e.g. all rows identical): report
    // the constant model at the lower sample tau-quantile
    std::vector<double> ys = ds.y;
    std::sort(ys.begin(), ys.end());
    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(tau * static_cast<double>(ds.n) - 1e-12)));
    best.beta.assign(p, 0.0);
    best.beta[0] = ys[std::min(k, ds.n) - 1];
    best.objective = objective(ds, best.beta, tau);
  }
  return best;
}

}  // namespace qlab::qr
