// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "qlab/lp.hpp"

using qlab::lp::LinearProgram;
using qlab::lp::LpOptions;
using qlab::lp::LpSolution;
using qlab::lp::LpStatus;

namespace {

LinearProgram make(std::size_t vars, std::size_t rows,
                   std::vector<double> cost, std::vector<double> b) {
  LinearProgram p;
  p.n_vars = vars;
  p.n_rows = rows;
  p.cost = std::move(cost);
  p.b = std::move(b);
  p.cols.resize(vars);
  return p;
}

}  // namespace

TEST_CASE("one equality, two variables") {
  // min x0 + 2 x1 st x0 + x1 = 1 -> x = (1, 0), objective 1
  LinearProgram p = make(2, 1, {1.0, 2.0}, {1.0});
  p.add_entry(0, 0, 1.0);
  p.add_entry(1, 0, 1.0);
  const LpSolution s = qlab::lp::solve(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.x[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(s.max_primal_resid <= 1e-9);
}

TEST_CASE("transport-style program") {
  // min 2a + 4b + c st a + b = 2, b + c = 1; on the feasible segment
  // b=t: cost 5 + t, so the optimum a=2, b=0, c=1 -> 5 is unique
  LinearProgram p = make(3, 2, {2.0, 4.0, 1.0}, {2.0, 1.0});
  p.add_entry(0, 0, 1.0);
  p.add_entry(1, 0, 1.0);
  p.add_entry(1, 1, 1.0);
  p.add_entry(2, 1, 1.0);
  const LpSolution s = qlab::lp::solve(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(s.x[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s.x[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("negative rhs is handled by sign normalization") {
  // x0 - x1 = -3 with min x0 + x1 -> x = (0, 3)
  LinearProgram p = make(2, 1, {1.0, 1.0}, {-3.0});
  p.add_entry(0, 0, 1.0);
  p.add_entry(1, 0, -1.0);
  const LpSolution s = qlab::lp::solve(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.x[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("infeasible program is reported") {
  // x0 = 1 and x0 = 2 cannot both hold
  LinearProgram p = make(1, 2, {1.0}, {1.0, 2.0});
  p.add_entry(0, 0, 1.0);
  p.add_entry(0, 1, 1.0);
  const LpSolution s = qlab::lp::solve(p);
  CHECK(s.status == LpStatus::Infeasible);
}

TEST_CASE("unbounded program is reported") {
  // min -x0 st x0 - x1 = 0: x0 = x1 -> -infinity
  LinearProgram p = make(2, 1, {-1.0, 0.0}, {0.0});
  p.add_entry(0, 0, 1.0);
  p.add_entry(1, 0, -1.0);
  const LpSolution s = qlab::lp::solve(p);
  CHECK(s.status == LpStatus::Unbounded);
}

TEST_CASE("degenerate program still terminates") {
  // several zero rhs rows force degenerate pivots
  LinearProgram p = make(4, 3, {1.0, 1.0, 1.0, -1.0}, {0.0, 0.0, 1.0});
  p.add_entry(0, 0, 1.0);
  p.add_entry(1, 0, -1.0);
  p.add_entry(1, 1, 1.0);
  p.add_entry(2, 1, -1.0);
  p.add_entry(2, 2, 1.0);
  p.add_entry(3, 2, 1.0);
  const LpSolution s = qlab::lp::solve(p);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("weak duality holds on random feasible programs") {
  std::mt19937 gen(2024);
  auto unif = [&]() {
    return static_cast<double>(gen()) / 4294967296.0;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 2 + gen() % 4;
    const std::size_t vars = rows + 1 + gen() % 6;
    LinearProgram p = make(vars, rows, {}, {});
    p.cost.resize(vars);
    p.b.assign(rows, 0.0);
    // random A, then b = A z for a nonnegative z: guaranteed feasible
    std::vector<double> dense(rows * vars);
    for (std::size_t j = 0; j < vars; ++j) {
      p.cost[j] = 2.0 * unif() - 0.5;
      for (std::size_t r = 0; r < rows; ++r) {
        const double a = 2.0 * unif() - 1.0;
        dense[r * vars + j] = a;
        p.add_entry(j, r, a);
      }
    }
    for (std::size_t j = 0; j < vars; ++j) {
      const double z = unif();
      for (std::size_t r = 0; r < rows; ++r) {
        p.b[r] += dense[r * vars + j] * z;
      }
    }
    const LpSolution s = qlab::lp::solve(p);
    if (s.status == LpStatus::Unbounded) continue;
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.max_primal_resid <= 1e-7);
    // duality: b.y == objective at an optimal basis, and reduced costs
    // are nonnegative
    REQUIRE(s.dual.size() == rows);
    double by = 0.0;
    for (std::size_t r = 0; r < rows; ++r) by += p.b[r] * s.dual[r];
    CHECK(by == doctest::Approx(s.objective).epsilon(1e-6).scale(1.0));
    for (std::size_t j = 0; j < vars; ++j) {
      double ay = 0.0;
      for (const auto& [r, a] : p.cols[j]) ay += a * s.dual[r];
      CHECK(p.cost[j] - ay >= -1e-7);
    }
  }
}

TEST_CASE("identical inputs give identical pivot sequences") {
  LinearProgram p = make(3, 2, {2.0, 3.0, 1.0}, {2.0, 1.0});
  p.add_entry(0, 0, 1.0);
  p.add_entry(1, 0, 1.0);
  p.add_entry(1, 1, 1.0);
  p.add_entry(2, 1, 1.0);
  const LpSolution a = qlab::lp::solve(p);
  const LpSolution b = qlab::lp::solve(p);
  CHECK(a.iterations == b.iterations);
  CHECK(a.x == b.x);
  CHECK(a.objective == b.objective);
}

TEST_CASE("iteration cap surfaces as IterationLimit") {
  LinearProgram p = make(3, 2, {2.0, 3.0, 1.0}, {2.0, 1.0});
  p.add_entry(0, 0, 1.0);
  p.add_entry(1, 0, 1.0);
  p.add_entry(1, 1, 1.0);
  p.add_entry(2, 1, 1.0);
  LpOptions opts;
  opts.max_iters = 1;
  const LpSolution s = qlab::lp::solve(p, opts);
  CHECK(s.status == LpStatus::IterationLimit);
}
