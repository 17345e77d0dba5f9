// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "qlab/dataset.hpp"
#include "qlab/isotonize.hpp"
#include "qlab/model.hpp"

using qlab::QuantileModel;
using qlab::QuantileSheet;
using qlab::ValidationError;
namespace iso = qlab::iso;

namespace {

QuantileSheet sheet_of(std::vector<double> values) {
  QuantileSheet s;
  s.values = std::move(values);
  s.taus.resize(s.values.size());
  for (std::size_t j = 0; j < s.taus.size(); ++j) {
    s.taus[j] = static_cast<double>(j + 1) /
                static_cast<double>(s.taus.size() + 1);
  }
  return s;
}

double weighted_sse(const std::vector<double>& fit,
                    const std::vector<double>& values,
                    const std::vector<double>& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += weights[i] * (fit[i] - values[i]) * (fit[i] - values[i]);
  }
  return s;
}

// Exhaustive isotonic projection for tiny q: try every contiguous block
// partition, keep candidates whose block means are nondecreasing, and
// return the weighted-SSE minimizer.
std::vector<double> enumerate_projection(const std::vector<double>& values,
                                         const std::vector<double>& weights) {
  const std::size_t q = values.size();
  std::vector<double> best;
  double best_sse = std::numeric_limits<double>::infinity();
  const std::size_t masks = q >= 1 ? (1u << (q - 1)) : 1;
  for (std::size_t mask = 0; mask < masks; ++mask) {
    // bit k set: boundary between k and k+1
    std::vector<double> cand(q);
    std::size_t start = 0;
    bool feasible = true;
    double prev_mean = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q; ++i) {
      const bool boundary = i + 1 == q || (mask >> i) & 1u;
      if (!boundary) continue;
      double num = 0.0;
      double den = 0.0;
      for (std::size_t k = start; k <= i; ++k) {
        num += weights[k] * values[k];
        den += weights[k];
      }
      const double mean = num / den;
      if (mean < prev_mean - 1e-12) {
        feasible = false;
        break;
      }
      for (std::size_t k = start; k <= i; ++k) cand[k] = mean;
      prev_mean = mean;
      start = i + 1;
    }
    if (!feasible) continue;
    const double sse = weighted_sse(cand, values, weights);
    if (sse < best_sse) {
      best_sse = sse;
      best = cand;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("correction names round-trip") {
  for (iso::Correction c : {iso::Correction::None, iso::Correction::Rearrange,
                            iso::Correction::Pav}) {
    CHECK(iso::correction_from_string(iso::to_string(c)) == c);
  }
  CHECK_THROWS_AS(iso::correction_from_string("sort"), ValidationError);
}

TEST_CASE("two-point fixtures") {
  const QuantileSheet crossed = sheet_of({2.1010, 1.6796});

  const QuantileSheet sorted = iso::rearrange(crossed);
  CHECK(sorted.values == std::vector<double>{1.6796, 2.1010});
  CHECK(sorted.isotonized);

  const QuantileSheet pooled = iso::pav_project(crossed);
  CHECK(pooled.values[0] == doctest::Approx(1.8903).epsilon(1e-12));
  CHECK(pooled.values[1] == doctest::Approx(1.8903).epsilon(1e-12));
  CHECK(pooled.isotonized);
}

TEST_CASE("three-point pooling fixture") {
  const std::vector<double> out = iso::pav({3.0, 1.0, 2.0}, {});
  CHECK(out == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("sorted input passes through") {
  const std::vector<double> v = {1.0, 2.0, 2.0, 5.0};
  CHECK(iso::pav(v, {}) == v);
  const QuantileSheet s = sheet_of(v);
  CHECK(iso::rearrange(s).values == v);
}

TEST_CASE("idempotence, multiset and mean preservation") {
  std::mt19937 gen(5);
  auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen()) / 4294967296.0);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t q = 2 + gen() % 7;
    std::vector<double> v(q);
    std::vector<double> w(q);
    for (std::size_t i = 0; i < q; ++i) {
      v[i] = unif(-5, 5);
      w[i] = unif(0.1, 3.0);
    }

    const std::vector<double> fit = iso::pav(v, w);
    CHECK(iso::pav(fit, w) == fit);  // idempotent
    for (std::size_t i = 0; i + 1 < q; ++i) CHECK(fit[i] <= fit[i + 1]);
    double before = 0.0;
    double after = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      before += w[i] * v[i];
      after += w[i] * fit[i];
    }
    CHECK(after == doctest::Approx(before).epsilon(1e-10));

    const QuantileSheet sheet = sheet_of(v);
    const QuantileSheet sorted = iso::rearrange(sheet);
    CHECK(iso::rearrange(sorted).values == sorted.values);
    std::vector<double> multiset = v;
    std::sort(multiset.begin(), multiset.end());
    CHECK(sorted.values == multiset);  // same values, restored order
  }
}

TEST_CASE("projection matches exhaustive enumeration for small q") {
  std::mt19937 gen(17);
  auto unif = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen()) / 4294967296.0);
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t q = 1 + gen() % 4;
    std::vector<double> v(q);
    std::vector<double> w(q);
    for (std::size_t i = 0; i < q; ++i) {
      v[i] = unif(-5, 5);
      w[i] = unif(0.1, 3.0);
    }
    const std::vector<double> fit = iso::pav(v, w);
    const std::vector<double> want = enumerate_projection(v, w);
    REQUIRE(fit.size() == want.size());
    for (std::size_t i = 0; i < q; ++i) {
      CHECK(fit[i] == doctest::Approx(want[i]).epsilon(1e-9).scale(1.0));
    }
    CHECK(weighted_sse(fit, v, w) <= weighted_sse(want, v, w) + 1e-9);
  }
}

TEST_CASE("weight validation") {
  CHECK_THROWS_AS(iso::pav({1.0, 2.0}, {1.0}), ValidationError);
  CHECK_THROWS_AS(iso::pav({1.0, 2.0}, {1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(iso::pav({1.0, 2.0}, {1.0, -2.0}), ValidationError);
}

TEST_CASE("coverage table on a constant-row model") {
  const qlab::Dataset ds = qlab::make_dataset(
      {{0.0, 0.0, 0.0, 0.0, 0.0}}, {1.0, 2.0, 3.0, 4.0, 5.0}, {"x"}, true);
  QuantileModel m;
  m.taus = {0.3, 0.7};
  m.p = 2;
  m.coef = {1.5, 0.0, 3.5, 0.0};
  m.fit_loss = {0.0, 0.0};
  m.intercept = true;
  m.feature_names = {"(intercept)", "x"};

  const auto rows = iso::quantile_property_gap(m, ds, iso::Correction::Rearrange);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].coverage_before == doctest::Approx(0.2));
  CHECK(rows[1].coverage_before == doctest::Approx(0.6));
  // ordered rows: correction changes nothing
  CHECK(rows[0].coverage_after == rows[0].coverage_before);
  CHECK(rows[1].coverage_after == rows[1].coverage_before);
  CHECK(rows[0].gap_before == doctest::Approx(0.1));
  CHECK(rows[1].gap_before == doctest::Approx(0.1));
}

TEST_CASE("coverage gap shrinks when correcting a crossed model") {
  const qlab::Dataset ds = qlab::make_dataset(
      {{0.0, 0.0, 0.0, 0.0, 0.0}}, {1.0, 2.0, 3.0, 4.0, 5.0}, {"x"}, true);
  QuantileModel m;
  m.taus = {0.3, 0.7};
  m.p = 2;
  m.coef = {3.5, 0.0, 1.5, 0.0};  // reversed rows: crossed everywhere
  m.fit_loss = {0.0, 0.0};
  m.intercept = true;
  m.feature_names = {"(intercept)", "x"};

  for (iso::Correction method :
       {iso::Correction::Rearrange, iso::Correction::Pav}) {
    const auto rows = iso::quantile_property_gap(m, ds, method);
    REQUIRE(rows.size() == 2);
    if (method == iso::Correction::Rearrange) {
      // rearrangement restores the intended per-tau values exactly
      CHECK(rows[0].coverage_after == doctest::Approx(0.2));
      CHECK(rows[1].coverage_after == doctest::Approx(0.6));
      CHECK(rows[0].gap_after < rows[0].gap_before);
      CHECK(rows[1].gap_after < rows[1].gap_before);
    }
  }

  const auto none = iso::quantile_property_gap(m, ds, iso::Correction::None);
  CHECK(none[0].coverage_after == none[0].coverage_before);
  CHECK(none[1].coverage_after == none[1].coverage_before);
}
