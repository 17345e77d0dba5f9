// SPDX-License-Identifier: Apache-2.0
#include "qlab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "qlab/cjqr.hpp"
#include "qlab/mqgd.hpp"
#include "qlab/qr.hpp"

namespace qlab::bench {

namespace {

// 53-bit uniform in [0,1) from two engine draws. Pinned here rather
// than using the library distributions so the generated bytes do not
// depend on the standard library implementation.
double next_uniform(std::mt19937& gen) {
  const std::uint64_t a = gen() >> 5;  // 27 bits
  const std::uint64_t b = gen() >> 6;  // 26 bits
  return (static_cast<double>(a) * 67108864.0 + static_cast<double>(b)) /
         9007199254740992.0;
}

// Polar Box-Muller, one variate per call, spare discarded.
double next_normal(std::mt19937& gen) {
  for (;;) {
    const double u = 2.0 * next_uniform(gen) - 1.0;
    const double v = 2.0 * next_uniform(gen) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

struct RunOutcome {
  double objective = 0.0;
  std::size_t iterations = 0;
  bool sane = true;
  std::string note;
};

// Optimality sign condition per tau: with residuals r = y - Xb, the
// counts satisfy #{r < 0} <= n tau <= #{r <= 0} at any optimum.
bool sign_condition(const Dataset& ds, const QuantileModel& model) {
  for (std::size_t j = 0; j < model.q(); ++j) {
    std::size_t below = 0;
    std::size_t at_or_below = 0;
    for (std::size_t i = 0; i < ds.n; ++i) {
      double pred = 0.0;
      for (std::size_t k = 0; k < ds.p; ++k) {
        pred += model.row(j)[k] * ds.xat(i, k);
      }
      const double r = ds.y[i] - pred;
      if (r < -1e-7) ++below;
      if (r <= 1e-7) ++at_or_below;
    }
    const double ntau = static_cast<double>(ds.n) * model.taus[j];
    if (static_cast<double>(below) > ntau + 1e-9) return false;
    if (ntau > static_cast<double>(at_or_below) + 1e-9) return false;
  }
  return true;
}

RunOutcome run_once(FitMethod method, const Dataset& ds, const TauGrid& taus,
                    const ScalingOptions& opts) {
  RunOutcome out;
  switch (method) {
    case FitMethod::IndependentQR: {
      const QuantileModel m = qr::fit_independent(ds, taus);
      for (double loss : m.fit_loss) out.objective += loss;
      out.sane = sign_condition(ds, m);
      if (!out.sane) out.note = "sign condition violated";
      break;
    }
    case FitMethod::CJQR: {
      const cjqr::JointFit fit = cjqr::fit_joint(ds, taus);
      out.objective = fit.objective;
      out.iterations = fit.stats.lp_iterations;
      const cjqr::ViolationReport v =
          cjqr::verify_noncrossing(fit.model, ds);
      out.sane = v.count == 0;
      if (!out.sane) out.note = "ordering violated";
      break;
    }
    case FitMethod::MQGD: {
      mqgd::MqgdConfig cfg;
      cfg.optimizer = mqgd::Optimizer::FirstOrderWithSchedule;
      cfg.max_iters = opts.gradient_iters;
      cfg.patience = opts.gradient_iters > 1 ? opts.gradient_iters - 1 : 1;
      cfg.min_improvement = 0.0;
      const mqgd::FitResult fit = mqgd::fit(ds, taus, cfg);
      out.objective = fit.final_loss;
      out.iterations = fit.trace.stopped_at;
      out.sane = std::isfinite(fit.final_loss);
      for (std::size_t k = 1; k < fit.trace.loss_history.size(); ++k) {
        if (fit.trace.loss_history[k] >
            fit.trace.loss_history[k - 1] + 1e-12) {
          out.sane = false;
          out.note = "loss history not monotone";
        }
      }
      break;
    }
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  if (v.size() % 2 == 1) return v[m];
  return 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

Dataset synth(std::size_t n, std::size_t p, std::uint32_t seed) {
  if (p < 2) throw ValidationError("synthetic data needs p >= 2");
  if (n < p) throw ValidationError("synthetic data needs n >= p");
  std::mt19937 gen(seed);
  const std::size_t n_feat = p - 1;  // intercept column is implicit
  std::vector<std::vector<double>> cols(n_feat, std::vector<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < n_feat; ++f) {
      cols[f][i] = 10.0 * next_uniform(gen);
    }
    const double eps = next_normal(gen);
    double mean = 2.0 + 0.3 * cols[0][i];
    for (std::size_t f = 1; f < n_feat; ++f) mean += 0.05 * cols[f][i];
    y[i] = mean + (0.5 + 0.15 * cols[0][i]) * eps;
  }
  std::vector<std::string> names(n_feat);
  for (std::size_t f = 0; f < n_feat; ++f) {
    names[f] = "x" + std::to_string(f + 1);
  }
  return make_dataset(cols, y, names, true);
}

std::vector<ScalingCell> scaling_run(FitMethod method,
                                     const std::vector<std::size_t>& n_list,
                                     const std::vector<std::size_t>& q_list,
                                     const ScalingOptions& opts) {
  if (opts.repeats == 0) throw ValidationError("repeats must be positive");
  std::vector<ScalingCell> cells;
  for (std::size_t n : n_list) {
    for (std::size_t q : q_list) {
      ScalingCell cell;
      cell.method = to_string(method);
      cell.n = n;
      cell.q = q;
      if (q == 0 || (method == FitMethod::CJQR && q < 2)) {
        cell.skipped = true;
        cell.note = "needs q >= 2";
        cells.push_back(cell);
        continue;
      }
      std::vector<double> levels(q);
      for (std::size_t j = 0; j < q; ++j) {
        levels[j] = static_cast<double>(j + 1) / static_cast<double>(q + 1);
      }
      const TauGrid taus(levels);
      try {
        const Dataset ds = synth(n, 2, opts.seed);
        RunOutcome outcome = run_once(method, ds, taus, opts);  // warmup
        std::vector<double> times(opts.repeats);
        for (std::size_t r = 0; r < opts.repeats; ++r) {
          const auto t0 = std::chrono::steady_clock::now();
          outcome = run_once(method, ds, taus, opts);
          const auto t1 = std::chrono::steady_clock::now();
          times[r] = std::chrono::duration<double>(t1 - t0).count();
        }
        cell.seconds = median(times);
        cell.objective = outcome.objective;
        cell.iterations = outcome.iterations;
        cell.sane = outcome.sane;
        cell.note = outcome.note;
        if (method == FitMethod::MQGD && outcome.iterations > 0) {
          cell.per_iter_seconds =
              cell.seconds / static_cast<double>(outcome.iterations);
        }
      } catch (const ValidationError& e) {
        cell.skipped = true;
        cell.note = e.what();
      } catch (const SolverError& e) {
        cell.sane = false;
        cell.note = e.what();
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

double loglog_slope(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw ValidationError("slope inputs must have equal length");
  }
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  const std::size_t m = lx.size();
  if (m < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

void write_scaling_csv(const std::string& path,
                       const std::vector<ScalingCell>& cells) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "method,n,q,seconds,per_iter_seconds,objective,iterations,"
         "skipped,sane\n";
  char buf[160];
  for (const ScalingCell& c : cells) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%zu,%.9g,%.9g,%.12g,%zu,%d,%d\n",
                  c.method.c_str(), c.n, c.q, c.seconds, c.per_iter_seconds,
                  c.objective, c.iterations, c.skipped ? 1 : 0,
                  c.sane ? 1 : 0);
    out << buf;
  }
  if (!out.good()) throw ValidationError("write failed: " + path);
}

std::string summarize(const std::vector<ScalingCell>& cells) {
  std::string text;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-12s %8s %4s %12s %14s %14s\n", "method",
                "n", "q", "seconds", "sec/iter", "objective");
  text += buf;
  for (const ScalingCell& c : cells) {
    if (c.skipped) {
      std::snprintf(buf, sizeof(buf), "%-12s %8zu %4zu %12s (%s)\n",
                    c.method.c_str(), c.n, c.q, "skipped", c.note.c_str());
    } else {
      std::snprintf(buf, sizeof(buf),
                    "%-12s %8zu %4zu %12.6f %14.9f %14.6f%s\n",
                    c.method.c_str(), c.n, c.q, c.seconds, c.per_iter_seconds,
                    c.objective, c.sane ? "" : "  [check failed]");
    }
    text += buf;
  }

  // slope in n at the smallest q, slope in q at the smallest n
  auto slope_line = [&](bool vary_n) {
    std::vector<double> xs;
    std::vector<double> ys;
    std::size_t anchor = 0;
    for (const ScalingCell& c : cells) {
      if (c.skipped) continue;
      const std::size_t fixed = vary_n ? c.q : c.n;
      if (anchor == 0) anchor = fixed;
      if (fixed != anchor) continue;
      xs.push_back(static_cast<double>(vary_n ? c.n : c.q));
      ys.push_back(c.seconds);
    }
    if (xs.size() >= 2) {
      std::snprintf(buf, sizeof(buf), "log-log slope in %s (%s=%zu): %.3f\n",
                    vary_n ? "n" : "q", vary_n ? "q" : "n", anchor,
                    loglog_slope(xs, ys));
      text += buf;
    }
  };
  slope_line(true);
  slope_line(false);
  return text;
}

}  // namespace qlab::bench
