// SPDX-License-Identifier: Apache-2.0
#include "qlab/mqgd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <random>

#include "qlab/kernels.hpp"

namespace qlab::mqgd {

namespace {

constexpr double kGradTol = 1e-12;
constexpr std::size_t kLbfgsMemory = 10;
constexpr double kArmijoC1 = 1e-4;
constexpr double kBacktrackShrink = 0.5;
constexpr std::size_t kMaxBacktracks = 20;

// Uniform in [0,1) from two engine draws (53-bit mantissa); avoids the
// implementation-defined std::uniform_real_distribution.
double next_uniform(std::mt19937& eng) {
  const double a = static_cast<double>(eng() >> 5);  // 27 bits
  const double b = static_cast<double>(eng() >> 6);  // 26 bits
  return (a * 67108864.0 + b) / 9007199254740992.0;
}

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

double logistic(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct Workspace {
  const Dataset& ds;
  const TauGrid& taus;
  std::size_t p, q, hidden, n;
  std::vector<double> xcols;   // p column-major copies of X
  std::vector<double> resid;   // n, per-head scratch
  std::vector<double> hidden_act;   // n*h activations (hidden case)
  std::vector<double> hidden_sig;   // n*h activation derivatives

  Workspace(const Dataset& d, const TauGrid& t, std::size_t h)
      : ds(d), taus(t), p(d.p), q(t.size()), hidden(h), n(d.n) {
    xcols.resize(p * n);
    for (std::size_t k = 0; k < p; ++k) {
      for (std::size_t i = 0; i < n; ++i) xcols[k * n + i] = d.xat(i, k);
    }
    resid.resize(n);
    if (hidden > 0) {
      hidden_act.resize(n * hidden);
      hidden_sig.resize(n * hidden);
    }
  }

  // Fills hidden_act / hidden_sig for the current first-layer weights.
  void forward_hidden(const Params& params) {
    const double* w1 = params.values.data();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < hidden; ++t) {
        const double z = kern::active().dot(w1 + t * p, ds.row(i), p);
        hidden_act[i * hidden + t] = softplus(z);
        hidden_sig[i * hidden + t] = logistic(z);
      }
    }
  }

  void head_residuals(const Params& params, std::size_t j) {
    if (hidden == 0) {
      const double* wj = params.values.data() + j * p;
      for (std::size_t i = 0; i < n; ++i) {
        resid[i] = ds.y[i] - kern::active().dot(wj, ds.row(i), p);
      }
    } else {
      const double* hj = params.values.data() + hidden * p + j * (hidden + 1);
      for (std::size_t i = 0; i < n; ++i) {
        double pred = hj[0];
        pred += kern::active().dot(hj + 1, hidden_act.data() + i * hidden,
                                   hidden);
        resid[i] = ds.y[i] - pred;
      }
    }
  }
};

double loss_inner(Workspace& ws, const Params& params) {
  if (ws.hidden > 0) ws.forward_hidden(params);
  double total = 0.0;
  for (std::size_t j = 0; j < ws.q; ++j) {
    ws.head_residuals(params, j);
    total += kern::active().pinball_sum(ws.resid.data(), ws.n, ws.taus[j]);
  }
  return total / static_cast<double>(ws.n);
}

void grad_inner(Workspace& ws, const Params& params, std::vector<double>& g) {
  g.assign(params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(ws.n);
  if (ws.hidden == 0) {
    for (std::size_t j = 0; j < ws.q; ++j) {
      ws.head_residuals(params, j);
      for (std::size_t k = 0; k < ws.p; ++k) {
        const double s = kern::active().sign_weighted_sum(
            ws.resid.data(), ws.xcols.data() + k * ws.n, ws.n, ws.taus[j]);
        g[j * ws.p + k] = -s * inv_n;
      }
    }
    return;
  }
  ws.forward_hidden(params);
  const std::size_t h = ws.hidden;
  const std::size_t off_heads = h * ws.p;
  const double* heads = params.values.data() + off_heads;
  std::vector<double> shared(ws.n * h, 0.0);
  for (std::size_t j = 0; j < ws.q; ++j) {
    ws.head_residuals(params, j);
    const double tau = ws.taus[j];
    double* gh = g.data() + off_heads + j * (h + 1);
    for (std::size_t i = 0; i < ws.n; ++i) {
      const double s = (ws.resid[i] < 0.0 ? tau - 1.0 : tau);
      gh[0] -= s * inv_n;
      for (std::size_t t = 0; t < h; ++t) {
        gh[1 + t] -= s * ws.hidden_act[i * h + t] * inv_n;
        shared[i * h + t] += s * heads[j * (h + 1) + 1 + t];
      }
    }
  }
  for (std::size_t i = 0; i < ws.n; ++i) {
    for (std::size_t t = 0; t < h; ++t) {
      const double c = -shared[i * h + t] * ws.hidden_sig[i * h + t] * inv_n;
      if (c != 0.0) {
        kern::active().axpy(c, ws.ds.row(i), g.data() + t * ws.p, ws.p);
      }
    }
  }
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

struct LbfgsMemoryPair {
  std::vector<double> s, y;
  double rho;
};

// Two-loop recursion with identity seed matrix.
std::vector<double> lbfgs_direction(const std::vector<double>& g,
                                    const std::deque<LbfgsMemoryPair>& mem) {
  std::vector<double> d = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t t = mem.size(); t-- > 0;) {
    alpha[t] = mem[t].rho * kern::active().dot(mem[t].s.data(), d.data(), d.size());
    kern::active().axpy(-alpha[t], mem[t].y.data(), d.data(), d.size());
  }
  for (std::size_t t = 0; t < mem.size(); ++t) {
    const double beta =
        mem[t].rho * kern::active().dot(mem[t].y.data(), d.data(), d.size());
    kern::active().axpy(alpha[t] - beta, mem[t].s.data(), d.data(), d.size());
  }
  for (double& v : d) v = -v;
  return d;
}

}  // namespace

void MqgdConfig::validate() const {
  if (max_iters == 0) throw ValidationError("max_iters must be positive");
  if (patience >= max_iters) {
    throw ValidationError("patience must be smaller than max_iters");
  }
  if (!(learning_rate > 0.0)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (min_improvement < 0.0) {
    throw ValidationError("min_improvement must be nonnegative");
  }
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Plateau: return "plateau";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::GradientTolerance: return "gradient_tolerance";
  }
  return "max_iters";
}

Params Params::shaped(std::size_t p, std::size_t q, std::size_t hidden) {
  Params params;
  params.p = p;
  params.q = q;
  params.hidden = hidden;
  const std::size_t count =
      hidden == 0 ? q * p : hidden * p + q * (hidden + 1);
  params.values.assign(count, 0.0);
  return params;
}

double composite_loss(const Params& params, const Dataset& ds,
                      const TauGrid& taus) {
  if (params.p != ds.p || params.q != taus.size()) {
    throw ValidationError("parameter shape does not match data and tau grid");
  }
  Workspace ws(ds, taus, params.hidden);
  return loss_inner(ws, params);
}

std::vector<double> subgradient(const Params& params, const Dataset& ds,
                                const TauGrid& taus) {
  if (params.p != ds.p || params.q != taus.size()) {
    throw ValidationError("parameter shape does not match data and tau grid");
  }
  Workspace ws(ds, taus, params.hidden);
  std::vector<double> g;
  grad_inner(ws, params, g);
  return g;
}

FitResult fit(const Dataset& ds, const TauGrid& taus, const MqgdConfig& cfg) {
  ds.validate();
  cfg.validate();
  const std::size_t p = ds.p, q = taus.size(), h = cfg.hidden_units;
  Workspace ws(ds, taus, h);
  Params params = Params::shaped(p, q, h);

  // Linear heads start at zero: the composite objective is convex, no
  // symmetry needs breaking, and identical heads order themselves by
  // tau through the first subgradient step. Hidden layers draw
  // scaled-uniform values from the seed.
  if (h > 0) {
    std::mt19937 eng(static_cast<std::uint32_t>(cfg.seed));
    const double b1 = 1.0 / std::sqrt(static_cast<double>(p));
    for (std::size_t t = 0; t < h * p; ++t) {
      params.values[t] = (2.0 * next_uniform(eng) - 1.0) * b1;
    }
    const double b2 = 1.0 / std::sqrt(static_cast<double>(h + 1));
    for (std::size_t t = h * p; t < params.size(); ++t) {
      params.values[t] = (2.0 * next_uniform(eng) - 1.0) * b2;
    }
  }

  TrainingTrace trace;
  double f = loss_inner(ws, params);
  if (!std::isfinite(f)) throw SolverError("non-finite initial training loss");
  trace.loss_history.push_back(f);
  std::vector<double> g;
  grad_inner(ws, params, g);

  double best = f;
  std::size_t streak = 0;
  std::deque<LbfgsMemoryPair> memory;
  std::vector<double> trial(params.size());
  StopReason reason = StopReason::MaxIters;
  std::size_t it = 0;

  const std::size_t warm = std::max<std::size_t>(1, cfg.max_iters / 10);
  const std::size_t peak_end = (cfg.max_iters * 6) / 10;

  for (; it < cfg.max_iters; ++it) {
    if (inf_norm(g) <= kGradTol) {
      reason = StopReason::GradientTolerance;
      break;
    }

    bool accepted = false;
    double f_new = f;
    if (cfg.optimizer == Optimizer::QuasiNewton) {
      std::vector<double> d = lbfgs_direction(g, memory);
      double gd = kern::active().dot(g.data(), d.data(), d.size());
      if (gd > -1e-14) {
        memory.clear();
        d = g;
        for (double& v : d) v = -v;
        gd = kern::active().dot(g.data(), d.data(), d.size());
      }
      const auto try_search = [&](const std::vector<double>& dir,
                                  double slope) {
        double step = 1.0;
        for (std::size_t bt = 0; bt < kMaxBacktracks; ++bt) {
          trial = params.values;
          kern::active().axpy(step, dir.data(), trial.data(), trial.size());
          Params cand = params;
          cand.values = trial;
          const double fc = loss_inner(ws, cand);
          if (!std::isfinite(fc)) {
            throw SolverError("non-finite training loss at iteration " +
                              std::to_string(it));
          }
          if (fc <= f + kArmijoC1 * step * slope &&
              fc < best - cfg.min_improvement) {
            f_new = fc;
            return true;
          }
          step *= kBacktrackShrink;
        }
        return false;
      };
      accepted = try_search(d, gd);
      if (!accepted && !memory.empty()) {
        memory.clear();
        d = g;
        for (double& v : d) v = -v;
        gd = kern::active().dot(g.data(), d.data(), d.size());
        accepted = try_search(d, gd);
      }
      if (accepted) {
        std::vector<double> g_new;
        Params cand = params;
        cand.values = trial;
        grad_inner(ws, cand, g_new);
        LbfgsMemoryPair pair;
        pair.s.resize(params.size());
        pair.y.resize(params.size());
        double sn = 0.0, yn = 0.0, sy = 0.0;
        for (std::size_t t = 0; t < params.size(); ++t) {
          pair.s[t] = trial[t] - params.values[t];
          pair.y[t] = g_new[t] - g[t];
          sn += pair.s[t] * pair.s[t];
          yn += pair.y[t] * pair.y[t];
          sy += pair.s[t] * pair.y[t];
        }
        if (sy > 1e-12 * std::sqrt(sn) * std::sqrt(yn)) {
          pair.rho = 1.0 / sy;
          memory.push_back(std::move(pair));
          if (memory.size() > kLbfgsMemory) memory.pop_front();
        }
        params.values = trial;
        f = f_new;
        g = std::move(g_new);
      }
    } else {
      // three-phase schedule: linear warmup, flat peak, linear decay
      double lr = cfg.learning_rate;
      if (it < warm) {
        lr = cfg.learning_rate * (0.1 + 0.9 * static_cast<double>(it + 1) /
                                            static_cast<double>(warm));
      } else if (it >= peak_end) {
        const double span =
            static_cast<double>(cfg.max_iters - peak_end);
        const double done = static_cast<double>(it - peak_end);
        lr = cfg.learning_rate * (1.0 - 0.95 * done / span);
      }
      kern::active().axpy(-lr, g.data(), params.values.data(), params.size());
      f = loss_inner(ws, params);
      if (!std::isfinite(f)) {
        throw SolverError("non-finite training loss at iteration " +
                          std::to_string(it));
      }
      grad_inner(ws, params, g);
      accepted = true;
    }

    trace.loss_history.push_back(f);
    if (f < best - cfg.min_improvement) {
      best = f;
      streak = 0;
    } else {
      ++streak;
    }
    if (streak >= cfg.patience) {
      reason = StopReason::Plateau;
      ++it;
      break;
    }
  }

  trace.stopped_at = it;
  trace.stop_reason = reason;

  FitResult out;
  out.params = params;
  out.trace = trace;
  out.final_loss = f;
  // A coefficient matrix can only represent the linear case; hidden
  // networks are carried in params and evaluated with predict_net.
  QuantileModel& m = out.model;
  m.taus = taus.taus;
  m.method = FitMethod::MQGD;
  m.intercept = ds.intercept;
  m.feature_names = ds.feature_names;
  m.seed = cfg.seed;
  if (h == 0) {
    m.p = p;
    m.coef = params.values;
  } else {
    m.p = 0;
  }
  m.fit_loss.resize(q);
  for (std::size_t j = 0; j < q; ++j) {
    ws.head_residuals(params, j);
    m.fit_loss[j] =
        kern::active().pinball_sum(ws.resid.data(), ws.n, taus[j]);
  }
  return out;
}

std::vector<double> predict_net(const Params& params,
                                const std::vector<double>& x_star) {
  if (x_star.size() != params.p) {
    throw ValidationError("prediction point length does not match parameters");
  }
  std::vector<double> out(params.q);
  if (params.hidden == 0) {
    for (std::size_t j = 0; j < params.q; ++j) {
      out[j] = kern::active().dot(params.values.data() + j * params.p,
                                  x_star.data(), params.p);
    }
    return out;
  }
  const std::size_t h = params.hidden;
  std::vector<double> act(h);
  for (std::size_t t = 0; t < h; ++t) {
    act[t] = softplus(
        kern::active().dot(params.values.data() + t * params.p, x_star.data(),
                           params.p));
  }
  for (std::size_t j = 0; j < params.q; ++j) {
    const double* hj = params.values.data() + h * params.p + j * (h + 1);
    out[j] = hj[0] + kern::active().dot(hj + 1, act.data(), h);
  }
  return out;
}

void export_trace_csv(const std::string& path, const TrainingTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write trace file: " + path);
  out << "iteration,loss\n";
  char buf[40];
  for (std::size_t i = 0; i < trace.loss_history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", trace.loss_history[i]);
    out << i << ',' << buf << '\n';
  }
}

}  // namespace qlab::mqgd
