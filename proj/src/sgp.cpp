// SPDX-License-Identifier: Apache-2.0
#include "qlab/sgp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "qlab/parallel.hpp"

namespace qlab::sgp {

namespace {

constexpr double kCrossTol = 1e-9;

std::string pair_message(std::size_t k, double lower, double upper) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "crossed sheet: values[%zu]=%.12g exceeds values[%zu]=%.12g",
                k, lower, k + 1, upper);
  return buf;
}

// Index of the first adjacent ordering violation, or q when none.
std::size_t first_violation(const std::vector<double>& v) {
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    if (v[k] > v[k + 1] + kCrossTol) return k;
  }
  return v.size();
}

double worst_violation(const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) {
    worst = std::max(worst, v[k] - v[k + 1]);
  }
  return worst;
}

}  // namespace

CrossingError::CrossingError(std::size_t pair_index_, double lower_,
                             double upper_)
    : std::runtime_error(pair_message(pair_index_, lower_, upper_)),
      pair_index(pair_index_),
      lower(lower_),
      upper(upper_) {}

std::string to_string(Policy policy) {
  switch (policy) {
    case Policy::RequireMonotone: return "require-monotone";
    case Policy::Rearrange: return "rearrange";
    case Policy::Pav: return "pav";
  }
  return "require-monotone";
}

Policy policy_from_string(const std::string& name) {
  if (name == "require-monotone") return Policy::RequireMonotone;
  if (name == "rearrange") return Policy::Rearrange;
  if (name == "pav") return Policy::Pav;
  throw ValidationError("unknown scoring policy: " + name);
}

SgpScore assign_sgp(const QuantileSheet& sheet, double y_star, Policy policy) {
  const std::size_t q = sheet.values.size();
  if (q < 2) {
    throw ValidationError("scoring needs at least two quantile levels");
  }
  if (sheet.taus.size() != q) {
    throw ValidationError("sheet tau/value length mismatch");
  }
  if (!std::isfinite(y_star)) {
    throw ValidationError("score target must be finite");
  }

  QuantileSheet work = sheet;
  const std::size_t bad = first_violation(sheet.values);
  if (bad < q) {
    if (policy == Policy::RequireMonotone) {
      throw CrossingError(bad, sheet.values[bad], sheet.values[bad + 1]);
    }
    work = policy == Policy::Rearrange ? iso::rearrange(sheet)
                                       : iso::pav_project(sheet);
  }

  const std::vector<double>& v = work.values;
  const std::vector<double>& t = work.taus;
  SgpScore score;
  if (y_star < v.front()) {
    score.tau_hat = t.front();
    score.bracket = 0;
    score.clamped = true;
    return score;
  }
  if (y_star > v.back()) {
    score.tau_hat = t.back();
    score.bracket = q - 2;
    score.clamped = true;
    return score;
  }
  for (std::size_t k = 0; k + 1 < q; ++k) {
    if (v[k] <= y_star && y_star <= v[k + 1]) {
      score.bracket = k;
      if (v[k + 1] > v[k]) {
        score.tau_hat =
            t[k] + (t[k + 1] - t[k]) * (y_star - v[k]) / (v[k + 1] - v[k]);
      } else {
        score.tau_hat = t[k];  // equal knots: lowest bracket
      }
      return score;
    }
  }
  // Sub-tolerance dips can leave y* between brackets; snap to the
  // nearest knot.
  std::size_t best = 0;
  for (std::size_t k = 1; k < q; ++k) {
    if (std::fabs(v[k] - y_star) < std::fabs(v[best] - y_star)) best = k;
  }
  score.bracket = best + 1 < q ? best : q - 2;
  score.tau_hat = t[best];
  return score;
}

BatchResult sgp_batch(const QuantileModel& model, const Dataset& students,
                      const TauGrid& taus, Policy policy) {
  model.validate();
  students.validate();
  if (students.p != model.p) {
    throw ValidationError("student feature width does not match the model");
  }
  if (taus.taus != model.taus) {
    throw ValidationError("tau grid does not match the model");
  }

  const std::size_t n = students.n;
  BatchResult out;
  out.rows.resize(n);
  std::vector<double> violations(n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    std::vector<double> x(students.row(i), students.row(i) + students.p);
    const QuantileSheet sheet = predict(model, x);
    violations[i] = worst_violation(sheet.values);

    SgpRow row;
    row.student = i;
    row.crossed = violations[i] > kCrossTol;
    if (row.crossed && policy == Policy::RequireMonotone) {
      row.scored = false;
      row.score.tau_hat = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.score = assign_sgp(sheet, students.y[i], policy);
    }
    out.rows[i] = row;
  });

  BatchSummary& s = out.summary;
  s.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    const SgpRow& row = out.rows[i];
    if (row.crossed) ++s.n_crossed;
    if (!row.scored) ++s.n_errors;
    if (row.scored && row.score.clamped) ++s.n_clamped;
    s.max_violation = std::max(s.max_violation, violations[i]);
  }
  s.crossing_frequency =
      n == 0 ? 0.0 : static_cast<double>(s.n_crossed) / static_cast<double>(n);
  return out;
}

double percentile_roundtrip(const QuantileModel& model,
                            const std::vector<double>& x_star,
                            iso::Correction method) {
  QuantileSheet sheet = predict(model, x_star);
  if (method != iso::Correction::None && sheet_crossed(sheet, kCrossTol)) {
    sheet = method == iso::Correction::Pav ? iso::pav_project(sheet)
                                           : iso::rearrange(sheet);
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < sheet.values.size(); ++j) {
    const SgpScore score =
        assign_sgp(sheet, sheet.values[j], Policy::RequireMonotone);
    worst = std::max(worst, std::fabs(score.tau_hat - sheet.taus[j]));
  }
  return worst;
}

int sgp_1_99(double tau_hat) {
  const long r = std::lround(100.0 * tau_hat);
  return static_cast<int>(std::clamp(r, 1L, 99L));
}

void write_sgp_csv(const std::string& path, const BatchResult& result) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << "student,tau_hat,sgp_1_99,clamped,crossed_before_correction\n";
  char buf[64];
  for (const SgpRow& row : result.rows) {
    out << row.student << ',';
    if (row.scored) {
      std::snprintf(buf, sizeof(buf), "%.12g", row.score.tau_hat);
      out << buf << ',' << sgp_1_99(row.score.tau_hat) << ','
          << (row.score.clamped ? 1 : 0);
    } else {
      out << "nan,nan,0";
    }
    out << ',' << (row.crossed ? 1 : 0) << '\n';
  }
  if (!out.good()) throw ValidationError("write failed: " + path);
}

std::string summary_to_json(const BatchSummary& summary) {
  nlohmann::ordered_json j;
  j["n"] = summary.n;
  j["n_crossed"] = summary.n_crossed;
  j["crossing_frequency"] = summary.crossing_frequency;
  j["max_violation"] = summary.max_violation;
  j["n_clamped"] = summary.n_clamped;
  j["n_errors"] = summary.n_errors;
  return j.dump(2) + "\n";
}

}  // namespace qlab::sgp
