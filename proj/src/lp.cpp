// SPDX-License-Identifier: Apache-2.0
#include "qlab/lp.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "qlab/dataset.hpp"
#include "qlab/kernels.hpp"

namespace qlab::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Working state for one solve. The basis inverse is kept dense and
// updated by pivot row operations; it is rebuilt from scratch before the
// final optimality claim (and periodically on long runs) to wash out
// accumulated update error.
struct Simplex {
  const LinearProgram& prob;
  std::size_t m;         // structural variables
  std::size_t r;         // rows
  std::vector<double> b;                 // sign-normalized rhs
  std::vector<int> rowsign;              // +1 or -1 applied to each row
  std::vector<double> binv;              // r*r row-major
  std::vector<int> basis;                // r entries, variable ids
  std::vector<char> in_basis;            // m+r flags
  std::vector<double> xb;                // basic values
  std::vector<double> cost;              // m+r, current phase costs
  std::vector<double> y;                 // duals, r
  std::vector<double> w;                 // entering column in basis coords
  std::size_t iterations = 0;
  std::size_t degenerate_streak = 0;
  std::size_t pivots_since_factor = 0;
  double pivot_tol;
  std::size_t bland_after;
  std::size_t max_iters;

  explicit Simplex(const LinearProgram& p, const LpOptions& opts)
      : prob(p),
        m(p.n_vars),
        r(p.n_rows),
        b(p.b),
        rowsign(p.n_rows, 1),
        binv(p.n_rows * p.n_rows, 0.0),
        basis(p.n_rows),
        in_basis(p.n_vars + p.n_rows, 0),
        xb(p.n_rows),
        cost(p.n_vars + p.n_rows, 0.0),
        y(p.n_rows),
        w(p.n_rows),
        pivot_tol(opts.pivot_tol),
        bland_after(opts.bland_after ? opts.bland_after
                                     : 3 * (p.n_rows + p.n_vars)),
        max_iters(opts.max_iters ? opts.max_iters
                                 : 50 * (p.n_rows + p.n_vars)) {
    for (std::size_t i = 0; i < r; ++i) {
      if (b[i] < 0.0) {
        b[i] = -b[i];
        rowsign[i] = -1;
      }
      binv[i * r + i] = 1.0;
      basis[i] = static_cast<int>(m + i);  // artificial for row i
      in_basis[m + i] = 1;
      xb[i] = b[i];
    }
  }

  double col_entry_sign(std::size_t row, double v) const {
    return rowsign[row] < 0 ? -v : v;
  }

  // w = Binv * (column of variable j in sign-normalized coordinates)
  void ftran(int j) {
    std::fill(w.begin(), w.end(), 0.0);
    if (j >= static_cast<int>(m)) {
      const std::size_t row = static_cast<std::size_t>(j) - m;
      for (std::size_t k = 0; k < r; ++k) w[k] = binv[k * r + row];
      return;
    }
    for (const auto& [row, v] : prob.cols[j]) {
      const double sv = col_entry_sign(row, v);
      for (std::size_t k = 0; k < r; ++k) w[k] += sv * binv[k * r + row];
    }
  }

  void compute_duals() {
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < r; ++k) s += cost[basis[k]] * binv[k * r + i];
      y[i] = s;
    }
  }

  double reduced_cost(int j) const {
    if (j >= static_cast<int>(m)) {
      return cost[j] - y[static_cast<std::size_t>(j) - m];
    }
    double s = cost[j];
    for (const auto& [row, v] : prob.cols[j]) {
      s -= y[row] * col_entry_sign(row, v);
    }
    return s;
  }

  // Entering variable. Artificials never re-enter. Returns -1 at
  // optimality for the current phase costs.
  int choose_entering(bool allow_artificials_never, bool bland) {
    (void)allow_artificials_never;
    int best = -1;
    double best_d = -pivot_tol;
    for (int j = 0; j < static_cast<int>(m); ++j) {
      if (in_basis[j]) continue;
      const double d = reduced_cost(j);
      if (bland) {
        if (d < -pivot_tol) return j;
      } else if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  }

  // Leaving row by minimum ratio; ties prefer basic artificials, then
  // the smallest basic variable id. Returns -1 when unbounded.
  int choose_leaving() {
    int row = -1;
    double best_ratio = kInf;
    for (std::size_t k = 0; k < r; ++k) {
      if (w[k] > pivot_tol) {
        const double ratio = xb[k] / w[k];
        if (ratio < best_ratio - 1e-12) {
          best_ratio = ratio;
          row = static_cast<int>(k);
        } else if (ratio < best_ratio + 1e-12 && row >= 0) {
          const bool cand_art = basis[k] >= static_cast<int>(m);
          const bool cur_art = basis[row] >= static_cast<int>(m);
          if (cand_art != cur_art) {
            if (cand_art) row = static_cast<int>(k);
          } else if (basis[k] < basis[row]) {
            row = static_cast<int>(k);
          }
        }
      }
    }
    return row;
  }

  void pivot(int enter, int leave_row) {
    const double piv = w[leave_row];
    const double* prow = binv.data() + static_cast<std::size_t>(leave_row) * r;
    const double theta = xb[leave_row] / piv;
    for (std::size_t k = 0; k < r; ++k) {
      if (static_cast<int>(k) == leave_row) continue;
      const double f = w[k] / piv;
      if (f != 0.0) {
        kern::active().axpy(-f, prow, binv.data() + k * r, r);
        xb[k] -= f * xb[leave_row];
        if (xb[k] < 0.0 && xb[k] > -1e-11) xb[k] = 0.0;
      }
    }
    kern::active().scale(1.0 / piv, binv.data() + static_cast<std::size_t>(leave_row) * r, r);
    xb[leave_row] = theta;
    in_basis[basis[leave_row]] = 0;
    basis[leave_row] = enter;
    in_basis[enter] = 1;
    if (theta <= 1e-12) {
      ++degenerate_streak;
    } else {
      degenerate_streak = 0;
    }
    ++pivots_since_factor;
  }

  // Rebuilds the basis inverse by Gauss-Jordan elimination with partial
  // pivoting and recomputes basic values with one refinement step.
  void refactorize() {
    std::vector<double> bm(r * r, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      const int j = basis[k];
      if (j >= static_cast<int>(m)) {
        bm[(static_cast<std::size_t>(j) - m) * r + k] = 1.0;
      } else {
        for (const auto& [row, v] : prob.cols[j]) {
          bm[static_cast<std::size_t>(row) * r + k] = col_entry_sign(row, v);
        }
      }
    }
    std::vector<double> inv(r * r, 0.0);
    for (std::size_t i = 0; i < r; ++i) inv[i * r + i] = 1.0;
    for (std::size_t c = 0; c < r; ++c) {
      std::size_t piv = c;
      double best = std::fabs(bm[c * r + c]);
      for (std::size_t k = c + 1; k < r; ++k) {
        const double a = std::fabs(bm[k * r + c]);
        if (a > best) {
          best = a;
          piv = k;
        }
      }
      if (best < 1e-14) throw SolverError("singular simplex basis");
      if (piv != c) {
        for (std::size_t t = 0; t < r; ++t) {
          std::swap(bm[piv * r + t], bm[c * r + t]);
          std::swap(inv[piv * r + t], inv[c * r + t]);
        }
      }
      const double d = bm[c * r + c];
      kern::active().scale(1.0 / d, bm.data() + c * r, r);
      kern::active().scale(1.0 / d, inv.data() + c * r, r);
      for (std::size_t k = 0; k < r; ++k) {
        if (k == c) continue;
        const double f = bm[k * r + c];
        if (f != 0.0) {
          kern::active().axpy(-f, bm.data() + c * r, bm.data() + k * r, r);
          kern::active().axpy(-f, inv.data() + c * r, inv.data() + k * r, r);
        }
      }
    }
    binv.swap(inv);
    recompute_xb();
    pivots_since_factor = 0;
  }

  void mat_vec_basis(const std::vector<double>& v, std::vector<double>& out) {
    // out = B * v where B has the basis columns.
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < r; ++k) {
      const int j = basis[k];
      const double vk = v[k];
      if (vk == 0.0) continue;
      if (j >= static_cast<int>(m)) {
        out[static_cast<std::size_t>(j) - m] += vk;
      } else {
        for (const auto& [row, val] : prob.cols[j]) {
          out[row] += col_entry_sign(row, val) * vk;
        }
      }
    }
  }

  void recompute_xb() {
    for (std::size_t k = 0; k < r; ++k) {
      xb[k] = kern::active().dot(binv.data() + k * r, b.data(), r);
    }
    // one iterative-refinement pass
    std::vector<double> bx(r), resid(r);
    mat_vec_basis(xb, bx);
    for (std::size_t i = 0; i < r; ++i) resid[i] = b[i] - bx[i];
    for (std::size_t k = 0; k < r; ++k) {
      xb[k] += kern::active().dot(binv.data() + k * r, resid.data(), r);
    }
    for (std::size_t k = 0; k < r; ++k) {
      if (xb[k] < 0.0 && xb[k] > -1e-10) xb[k] = 0.0;
    }
  }

  // Runs pricing-pivot iterations under the current cost vector.
  // Returns Optimal, Unbounded, or IterationLimit.
  LpStatus iterate() {
    for (;;) {
      if (iterations >= max_iters) return LpStatus::IterationLimit;
      if (pivots_since_factor >= 1024) refactorize();
      compute_duals();
      const bool bland = degenerate_streak > bland_after;
      const int enter = choose_entering(true, bland);
      if (enter < 0) {
        // Verify the optimality claim against a freshly factorized
        // inverse; update error can fake convergence.
        if (pivots_since_factor > 0) {
          refactorize();
          compute_duals();
          const int again = choose_entering(true, bland);
          if (again < 0) return LpStatus::Optimal;
          continue;
        }
        return LpStatus::Optimal;
      }
      ftran(enter);
      const int leave = choose_leaving();
      if (leave < 0) return LpStatus::Unbounded;
      pivot(enter, leave);
      ++iterations;
    }
  }

  double basic_objective() const {
    double s = 0.0;
    for (std::size_t k = 0; k < r; ++k) s += cost[basis[k]] * xb[k];
    return s;
  }
};

}  // namespace

LpSolution solve(const LinearProgram& prob, const LpOptions& opts) {
  if (prob.cost.size() != prob.n_vars || prob.b.size() != prob.n_rows ||
      prob.cols.size() != prob.n_vars) {
    throw ValidationError("linear program shape mismatch");
  }
  for (double v : prob.b) {
    if (!std::isfinite(v)) throw ValidationError("non-finite rhs in LP");
  }

  Simplex s(prob, opts);
  LpSolution out;

  // Phase 1: minimize the sum of artificials.
  for (std::size_t i = 0; i < prob.n_rows; ++i) s.cost[prob.n_vars + i] = 1.0;
  LpStatus st = s.iterate();
  if (st == LpStatus::IterationLimit) {
    out.status = st;
    out.iterations = s.iterations;
    return out;
  }
  if (st == LpStatus::Unbounded) {
    throw SolverError("phase-1 subproblem reported unbounded");
  }
  s.refactorize();
  if (s.basic_objective() > 1e-7) {
    out.status = LpStatus::Infeasible;
    out.iterations = s.iterations;
    return out;
  }

  // Drive basic artificials out where a structural pivot exists;
  // rows without one are redundant and keep a zero-valued artificial.
  for (std::size_t k = 0; k < s.r; ++k) {
    if (s.basis[k] < static_cast<int>(s.m)) continue;
    int pivot_var = -1;
    for (int j = 0; j < static_cast<int>(s.m); ++j) {
      if (s.in_basis[j]) continue;
      s.ftran(j);
      if (std::fabs(s.w[k]) > 1e-7) {
        pivot_var = j;
        break;
      }
    }
    if (pivot_var >= 0) {
      s.ftran(pivot_var);
      const double piv = s.w[k];
      const double* prow = s.binv.data() + k * s.r;
      for (std::size_t t = 0; t < s.r; ++t) {
        if (t == k) continue;
        const double f = s.w[t] / piv;
        if (f != 0.0) {
          kern::active().axpy(-f, prow, s.binv.data() + t * s.r, s.r);
          s.xb[t] -= f * s.xb[k];
        }
      }
      kern::active().scale(1.0 / piv, s.binv.data() + k * s.r, s.r);
      s.xb[k] /= piv;
      s.in_basis[s.basis[k]] = 0;
      s.basis[k] = pivot_var;
      s.in_basis[pivot_var] = 1;
      ++s.pivots_since_factor;
    }
  }

  // Phase 2 with the real costs. Artificials keep cost 0 and are barred
  // from entering; any still basic stay pinned at value 0.
  std::fill(s.cost.begin(), s.cost.end(), 0.0);
  std::copy(prob.cost.begin(), prob.cost.end(), s.cost.begin());
  s.degenerate_streak = 0;
  st = s.iterate();
  out.iterations = s.iterations;
  if (st != LpStatus::Optimal) {
    out.status = st;
    return out;
  }

  s.refactorize();
  out.x.assign(prob.n_vars, 0.0);
  for (std::size_t k = 0; k < s.r; ++k) {
    if (s.basis[k] < static_cast<int>(s.m)) {
      out.x[s.basis[k]] = s.xb[k] < 0.0 ? 0.0 : s.xb[k];
    }
  }
  out.objective = kern::active().dot(prob.cost.data(), out.x.data(), prob.n_vars);
  s.compute_duals();
  out.dual.resize(s.r);
  for (std::size_t i = 0; i < s.r; ++i) {
    out.dual[i] = s.rowsign[i] < 0 ? -s.y[i] : s.y[i];
  }
  double resid = 0.0;
  std::vector<double> ax(prob.n_rows, 0.0);
  for (std::size_t j = 0; j < prob.n_vars; ++j) {
    const double xj = out.x[j];
    if (xj == 0.0) continue;
    for (const auto& [row, v] : prob.cols[j]) ax[row] += v * xj;
  }
  for (std::size_t i = 0; i < prob.n_rows; ++i) {
    resid = std::max(resid, std::fabs(ax[i] - prob.b[i]));
  }
  out.max_primal_resid = resid;
  out.status = LpStatus::Optimal;
  return out;
}

}  // namespace qlab::lp
