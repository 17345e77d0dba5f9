// SPDX-License-Identifier: Apache-2.0
#include "qlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "qlab/cjqr.hpp"
#include "qlab/dataset.hpp"
#include "qlab/isotonize.hpp"
#include "qlab/model.hpp"
#include "qlab/mqgd.hpp"
#include "qlab/qr.hpp"
#include "qlab/sgp.hpp"

namespace qlab::report {

namespace {

using nlohmann::ordered_json;

// Published coefficient rows the reproduction is measured against.
constexpr double kExpectedIndep[2][2] = {{2.1010, -0.0789}, {1.6796, 0.0453}};
constexpr double kExpectedJoint[2][2] = {{1.7727, 0.0}, {1.7727, 0.0}};
constexpr double kExpectedGrad[2][2] = {{1.8445, -0.0127}, {1.9084, -0.0022}};
constexpr double kExpectedX10[2] = {1.312, 2.133};
constexpr double kExpectedX0[2] = {2.1010, 1.6796};
constexpr double kExpectedCrossX = 3.393;
// The source analysis states the curves cross near x = 5.08; its own
// printed coefficients imply 3.393. Both are carried in the report.
constexpr double kStatedCrossX = 5.08;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

ordered_json coef_json(const QuantileModel& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t j = 0; j < m.q(); ++j) {
    ordered_json row = ordered_json::array();
    for (std::size_t k = 0; k < m.p; ++k) row.push_back(m.row(j)[k]);
    rows.push_back(row);
  }
  return rows;
}

struct CheckList {
  std::vector<CheckRow> rows;

  void add(const std::string& name, bool pass, const std::string& detail,
           bool warn_only = false) {
    rows.push_back({name, pass, warn_only, detail});
  }
};

}  // namespace

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string config_hash(
    std::vector<std::pair<std::string, std::string>> entries) {
  std::sort(entries.begin(), entries.end());
  std::string canon;
  for (const auto& [k, v] : entries) {
    canon += k;
    canon += '=';
    canon += v;
    canon += '\n';
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canon)));
  return buf;
}

ReproduceResult run_reproduce(long long seed) {
  const Dataset ds = reference_dataset();
  const TauGrid taus({0.10, 0.15});
  CheckList checks;

  // independent per-tau fits
  const QuantileModel indep = qr::fit_independent(ds, taus);
  double indep_sum = 0.0;
  for (double loss : indep.fit_loss) indep_sum += loss;

  bool coef_ok = true;
  std::string coef_detail;
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t k = 0; k < 2; ++k) {
      const double got = indep.row(j)[k];
      const double want = kExpectedIndep[j][k];
      if (std::fabs(got - want) > 1e-3) {
        coef_ok = false;
        coef_detail += "row " + std::to_string(j) + " coef " +
                       std::to_string(k) + ": fitted " + fmt("%.6f", got) +
                       " vs expected " + fmt("%.4f", want) + "; ";
      }
    }
  }
  checks.add("independent coefficients match expected rows (1e-3)", coef_ok,
             coef_ok ? "all four coefficients within tolerance" : coef_detail);

  bool oracle_ok = true;
  std::string oracle_detail;
  std::vector<double> oracle_obj(2);
  for (std::size_t j = 0; j < 2; ++j) {
    const qr::SingleFit ref = qr::brute_force_oracle(ds, taus[j]);
    oracle_obj[j] = ref.objective;
    const double gap = std::fabs(indep.fit_loss[j] - ref.objective);
    if (gap > 1e-9) {
      oracle_ok = false;
      oracle_detail += "tau " + fmt("%.2f", taus[j]) + " gap " +
                       fmt("%.3g", gap) + "; ";
    }
  }
  checks.add("independent objectives match exhaustive oracle (1e-9)",
             oracle_ok,
             oracle_ok ? "both objectives agree" : oracle_detail);

  // evaluation chain on the published rows
  QuantileModel published;
  published.taus = taus.taus;
  published.p = 2;
  published.coef = {kExpectedIndep[0][0], kExpectedIndep[0][1],
                    kExpectedIndep[1][0], kExpectedIndep[1][1]};
  published.method = FitMethod::IndependentQR;
  published.intercept = true;
  published.feature_names = {"(intercept)", "x"};
  published.fit_loss = {0.0, 0.0};

  const QuantileSheet at10 = predict(published, {1.0, 10.0});
  const QuantileSheet at0 = predict(published, {1.0, 0.0});
  bool x10_ok = std::fabs(at10.values[0] - kExpectedX10[0]) <= 2e-3 &&
                std::fabs(at10.values[1] - kExpectedX10[1]) <= 2e-3;
  checks.add("evaluation chain at x=10 (2e-3)", x10_ok,
             "got (" + fmt("%.4f", at10.values[0]) + ", " +
                 fmt("%.4f", at10.values[1]) + ")");
  bool x0_ok = std::fabs(at0.values[0] - kExpectedX0[0]) <= 1e-12 &&
               std::fabs(at0.values[1] - kExpectedX0[1]) <= 1e-12;
  checks.add("evaluation chain at x=0 (exact)", x0_ok,
             "got (" + fmt("%.4f", at0.values[0]) + ", " +
                 fmt("%.4f", at0.values[1]) + ")");
  const bool crossed_at0 = sheet_crossed(at0);
  checks.add("ordering violation detected at x=0", crossed_at0,
             crossed_at0 ? "lower tau predicts above upper tau"
                         : "no violation detected");

  const double cross_x =
      (kExpectedIndep[0][0] - kExpectedIndep[1][0]) /
      (kExpectedIndep[1][1] - kExpectedIndep[0][1]);
  const bool cross_ok = std::fabs(cross_x - kExpectedCrossX) <= 0.01;
  checks.add("crossing abscissa from coefficients (3.393 +- 0.01)", cross_ok,
             "derived " + fmt("%.6f", cross_x));

  // joint fit
  const cjqr::JointFit joint = cjqr::fit_joint(ds, taus);
  bool joint_ok = true;
  std::string joint_detail;
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t k = 0; k < 2; ++k) {
      const double got = joint.model.row(j)[k];
      const double want = kExpectedJoint[j][k];
      if (std::fabs(got - want) > 1e-3) {
        joint_ok = false;
        joint_detail += "row " + std::to_string(j) + " coef " +
                        std::to_string(k) + ": fitted " + fmt("%.6f", got) +
                        " vs expected " + fmt("%.4f", want) + "; ";
      }
    }
  }
  checks.add("joint coefficients match expected rows (1e-3)", joint_ok,
             joint_ok ? "both rows within tolerance" : joint_detail);

  const cjqr::ViolationReport viol = cjqr::verify_noncrossing(joint.model, ds);
  checks.add("joint fit free of ordering violations", viol.count == 0,
             std::to_string(viol.count) + " violations");
  const bool sandwich = joint.objective >= indep_sum - 1e-9;
  checks.add("joint objective at least the sum of separate optima", sandwich,
             "joint " + fmt("%.9f", joint.objective) + " vs sum " +
                 fmt("%.9f", indep_sum));

  // gradient trainer
  mqgd::MqgdConfig cfg;
  cfg.seed = seed;
  const mqgd::FitResult grad = mqgd::fit(ds, taus, cfg);
  const double rate = crossing_rate(grad.model, line_grid(0.0, 10.0, 101));
  checks.add("gradient-trained model has zero crossing rate on [0,10]",
             rate == 0.0, "rate " + fmt("%.4f", rate));
  const double floor = indep_sum / static_cast<double>(ds.n);
  const bool floor_ok =
      grad.final_loss >= floor - 1e-9 && grad.final_loss <= 1.10 * floor;
  checks.add("gradient-trained loss within 10% of separable floor", floor_ok,
             "loss " + fmt("%.9f", grad.final_loss) + " vs floor " +
                 fmt("%.9f", floor));
  double grad_dev = 0.0;
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t k = 0; k < 2; ++k) {
      grad_dev = std::max(
          grad_dev, std::fabs(grad.model.row(j)[k] - kExpectedGrad[j][k]));
    }
  }
  checks.add("gradient-trained coefficients near expected rows (0.15)",
             grad_dev <= 0.15, "max deviation " + fmt("%.4f", grad_dev),
             /*warn_only=*/true);

  // coverage at tau = 0.10 before and after correction
  const std::vector<iso::CoverageRow> coverage =
      iso::quantile_property_gap(indep, ds, iso::Correction::Rearrange);
  const double cov10 = coverage[0].coverage_before;
  checks.add("coverage at tau=0.10 is exactly 0.10",
             cov10 == 0.10, "coverage " + fmt("%.4f", cov10) + " (" +
                 fmt("%.0f", cov10 * static_cast<double>(ds.n)) + " of " +
                 std::to_string(ds.n) + " rows at or below)");

  const double roundtrip_x5 =
      sgp::percentile_roundtrip(indep, {1.0, 5.0}, iso::Correction::Rearrange);

  // assemble the JSON document
  ordered_json doc;
  doc["format"] = "qlab-reproduce-v1";
  doc["tool_version"] = kToolVersion;
  doc["seed"] = seed;
  doc["config_hash"] = config_hash({{"command", "reproduce"},
                                    {"taus", "0.10,0.15"},
                                    {"seed", std::to_string(seed)}});
  doc["dataset"] = {{"rows", ds.n},
                    {"columns", ds.p},
                    {"source", "embedded reference sample"}};
  doc["taus"] = taus.taus;

  ordered_json methods;
  methods["independent"] = {{"coef", coef_json(indep)},
                            {"per_tau_loss", indep.fit_loss},
                            {"objective_sum", indep_sum},
                            {"oracle_objectives", oracle_obj}};
  methods["cjqr"] = {{"coef", coef_json(joint.model)},
                     {"objective", joint.objective},
                     {"lp_vars", joint.stats.n_vars},
                     {"equality_rows", joint.stats.n_eq},
                     {"ordering_rows", joint.stats.n_ineq},
                     {"violations", viol.count}};
  methods["mqgd"] = {{"coef", coef_json(grad.model)},
                     {"final_loss", grad.final_loss},
                     {"iterations", grad.trace.stopped_at},
                     {"stop_reason", to_string(grad.trace.stop_reason)},
                     {"crossing_rate_grid", rate}};
  doc["methods"] = methods;

  ordered_json expected;
  expected["independent"] = {{kExpectedIndep[0][0], kExpectedIndep[0][1]},
                             {kExpectedIndep[1][0], kExpectedIndep[1][1]}};
  expected["cjqr"] = {{kExpectedJoint[0][0], kExpectedJoint[0][1]},
                      {kExpectedJoint[1][0], kExpectedJoint[1][1]}};
  expected["mqgd"] = {{kExpectedGrad[0][0], kExpectedGrad[0][1]},
                      {kExpectedGrad[1][0], kExpectedGrad[1][1]}};
  expected["x10"] = {kExpectedX10[0], kExpectedX10[1]};
  expected["x0"] = {kExpectedX0[0], kExpectedX0[1]};
  expected["crossing_x"] = kExpectedCrossX;
  doc["expected"] = expected;

  ordered_json evals;
  evals["published_rows_at_x10"] = at10.values;
  evals["published_rows_at_x0"] = at0.values;
  evals["crossing_x_from_coefficients"] = cross_x;
  evals["crossing_x_stated_in_source"] = kStatedCrossX;
  evals["crossing_note"] =
      "the source analysis states the crossing near x=5.08; the value "
      "implied by its printed coefficients is " +
      fmt("%.3f", cross_x) + " (documented inconsistency)";
  {
    const QuantileSheet f10 = predict(indep, {1.0, 10.0});
    const QuantileSheet f0 = predict(indep, {1.0, 0.0});
    evals["fitted_independent_at_x10"] = f10.values;
    evals["fitted_independent_at_x0"] = f0.values;
  }
  evals["roundtrip_discrepancy_x5"] = roundtrip_x5;
  doc["evaluations"] = evals;

  ordered_json cov = ordered_json::array();
  for (const iso::CoverageRow& row : coverage) {
    cov.push_back({{"tau", row.tau},
                   {"coverage_before", row.coverage_before},
                   {"coverage_after", row.coverage_after},
                   {"gap_before", row.gap_before},
                   {"gap_after", row.gap_after}});
  }
  doc["coverage"] = cov;

  ReproduceResult out;
  out.checks = checks.rows;
  out.pass = true;
  ordered_json rows = ordered_json::array();
  for (const CheckRow& row : checks.rows) {
    rows.push_back({{"name", row.name},
                    {"pass", row.pass},
                    {"warn_only", row.warn_only},
                    {"detail", row.detail}});
    if (!row.pass && !row.warn_only) out.pass = false;
  }
  doc["checks"] = rows;
  doc["pass"] = out.pass;

  out.report_json = doc.dump(2) + "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << content;
  if (!out.good()) throw ValidationError("write failed: " + path);
}

std::string render_checks(const std::vector<CheckRow>& checks) {
  std::string text;
  for (const CheckRow& row : checks) {
    const char* tag = row.pass ? "[PASS]" : (row.warn_only ? "[WARN]" : "[FAIL]");
    text += tag;
    text += ' ';
    text += row.name;
    text += ": ";
    text += row.detail;
    text += '\n';
  }
  return text;
}

}  // namespace qlab::report
