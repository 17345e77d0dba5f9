// SPDX-License-Identifier: Apache-2.0
//
// qlab command-line driver.
//
// Exit codes: 0 success, 2 input or validation problem, 3 solver
// failure, 4 reproduction check failure. Config files are flat
// key=value lines matching the long option names; explicit command-line
// flags take precedence over config file entries.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qlab/bench.hpp"
#include "qlab/cjqr.hpp"
#include "qlab/dataset.hpp"
#include "qlab/isotonize.hpp"
#include "qlab/model.hpp"
#include "qlab/mqgd.hpp"
#include "qlab/qr.hpp"
#include "qlab/report.hpp"
#include "qlab/sgp.hpp"

namespace {

using nlohmann::ordered_json;
using qlab::Dataset;
using qlab::FitMethod;
using qlab::QuantileModel;
using qlab::SolverError;
using qlab::TauGrid;
using qlab::ValidationError;

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t a = s.find_first_not_of(ws);
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(ws);
  return s.substr(a, b - a + 1);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            " is not key=value: " + t);
    }
    entries[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return entries;
}

long long to_ll(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long r = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ValidationError("config key '" + key + "' needs an integer, got '" +
                          v + "'");
  }
  return r;
}

std::size_t to_sz(const std::string& key, const std::string& v) {
  const long long r = to_ll(key, v);
  if (r < 0) throw ValidationError("config key '" + key + "' must be >= 0");
  return static_cast<std::size_t>(r);
}

double to_dbl(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double r = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ValidationError("config key '" + key + "' needs a number, got '" +
                          v + "'");
  }
  return r;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ValidationError("config key '" + key + "' needs true/false, got '" +
                        v + "'");
}

// Binds config keys to option storage. apply() assigns values for every
// key whose matching command-line flag was not given explicitly.
class ConfigBinding {
 public:
  void add(const std::string& key, const std::string& flag,
           std::function<void(const std::string&)> setter) {
    entries_[key] = {flag, std::move(setter)};
  }

  void apply(const CLI::App* sub, const std::string& config_path) const {
    if (config_path.empty()) return;
    for (const auto& [key, value] : read_config_file(config_path)) {
      const auto it = entries_.find(key);
      if (it == entries_.end()) {
        throw ValidationError("unknown config key: " + key);
      }
      if (sub->count(it->second.first) > 0) continue;  // flag wins
      it->second.second(value);
    }
  }

 private:
  struct Entry {
    std::string first;
    std::function<void(const std::string&)> second;
  };
  std::map<std::string, Entry> entries_;
};

TauGrid parse_taus(const std::string& text) {
  if (text == "sgp") return TauGrid::percentile_grid();
  std::vector<double> levels;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        trim(text.substr(pos, comma == std::string::npos ? std::string::npos
                                                         : comma - pos));
    if (tok.empty()) throw ValidationError("empty entry in tau list");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      throw ValidationError("bad tau value: " + tok);
    }
    levels.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return TauGrid(levels);
}

std::vector<std::size_t> parse_size_list(const std::string& key,
                                         const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        trim(text.substr(pos, comma == std::string::npos ? std::string::npos
                                                         : comma - pos));
    if (!tok.empty()) out.push_back(to_sz(key, tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ValidationError(key + " list is empty");
  return out;
}

std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

Dataset load_or_embedded(const std::string& data, const std::string& response,
                         bool intercept, bool allow_empty = false) {
  if (data.empty()) return qlab::reference_dataset();
  return qlab::load_csv(data, response, intercept, allow_empty);
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  std::string data;
  std::string method = "independent";
  std::string taus = "sgp";
  std::string out_dir = ".";
  std::string config;
  std::string response = "y";
  bool intercept = true;
  long long seed = 42;
  std::size_t hidden_units = 0;
  std::size_t max_iters = 10000;
  std::size_t patience = 500;
  double min_improvement = 1e-8;
  double learning_rate = 0.01;
  std::string optimizer = "quasi-newton";
};

qlab::mqgd::Optimizer parse_optimizer(const std::string& name) {
  if (name == "quasi-newton") return qlab::mqgd::Optimizer::QuasiNewton;
  if (name == "first-order") {
    return qlab::mqgd::Optimizer::FirstOrderWithSchedule;
  }
  throw ValidationError("unknown optimizer: " + name);
}

int run_fit(const FitOptions& o) {
  const FitMethod method = qlab::fit_method_from_string(o.method);
  const Dataset ds = load_or_embedded(o.data, o.response, o.intercept);
  const TauGrid taus = parse_taus(o.taus);

  const std::string hash = qlab::report::config_hash(
      {{"command", "fit"},
       {"data", o.data.empty() ? "embedded" : o.data},
       {"method", o.method},
       {"taus", o.taus},
       {"response", o.response},
       {"intercept", o.intercept ? "true" : "false"},
       {"seed", std::to_string(o.seed)},
       {"hidden-units", std::to_string(o.hidden_units)},
       {"max-iters", std::to_string(o.max_iters)},
       {"patience", std::to_string(o.patience)},
       {"min-improvement", std::to_string(o.min_improvement)},
       {"learning-rate", std::to_string(o.learning_rate)},
       {"optimizer", o.optimizer}});

  QuantileModel model;
  ordered_json extra;
  if (method == FitMethod::IndependentQR) {
    model = qlab::qr::fit_independent(ds, taus);
  } else if (method == FitMethod::CJQR) {
    const qlab::cjqr::JointFit fit = qlab::cjqr::fit_joint(ds, taus);
    model = fit.model;
    extra["joint"] = {{"objective", fit.objective},
                      {"lp_vars", fit.stats.n_vars},
                      {"equality_rows", fit.stats.n_eq},
                      {"ordering_rows", fit.stats.n_ineq},
                      {"lp_iterations", fit.stats.lp_iterations},
                      {"solve_seconds", fit.stats.solve_seconds}};
  } else {
    if (o.hidden_units > 0) {
      throw ValidationError(
          "model files store linear coefficient rows; hidden-unit networks "
          "are available through the library interface only");
    }
    qlab::mqgd::MqgdConfig cfg;
    cfg.hidden_units = o.hidden_units;
    cfg.max_iters = o.max_iters;
    cfg.patience = o.patience;
    cfg.min_improvement = o.min_improvement;
    cfg.seed = o.seed;
    cfg.optimizer = parse_optimizer(o.optimizer);
    cfg.learning_rate = o.learning_rate;
    const qlab::mqgd::FitResult fit = qlab::mqgd::fit(ds, taus, cfg);
    model = fit.model;
    extra["training"] = {
        {"final_loss", fit.final_loss},
        {"iterations", fit.trace.stopped_at},
        {"stop_reason", qlab::mqgd::to_string(fit.trace.stop_reason)}};
    qlab::mqgd::export_trace_csv(out_path(o.out_dir, "trace.csv"), fit.trace);
  }

  qlab::save_model(out_path(o.out_dir, "model.json"), model,
                   qlab::report::kToolVersion, hash);

  const qlab::cjqr::ViolationReport viol =
      qlab::cjqr::verify_noncrossing(model, ds);
  double objective_sum = 0.0;
  for (double loss : model.fit_loss) objective_sum += loss;

  ordered_json rep;
  rep["format"] = "qlab-fit-report-v1";
  rep["tool_version"] = qlab::report::kToolVersion;
  rep["config_hash"] = hash;
  rep["method"] = o.method;
  rep["seed"] = o.seed;
  rep["rows"] = ds.n;
  rep["columns"] = ds.p;
  rep["taus"] = taus.taus;
  rep["per_tau_loss"] = model.fit_loss;
  rep["objective_sum"] = objective_sum;
  rep["training_row_crossings"] = {{"violations", viol.count},
                                   {"max_magnitude", viol.max_magnitude}};
  if (!extra.is_null()) {
    for (auto& [k, v] : extra.items()) rep[k] = v;
  }
  qlab::report::write_text_file(out_path(o.out_dir, "fit_report.json"),
                                rep.dump(2) + "\n");

  std::printf("fit: method=%s q=%zu n=%zu objective_sum=%.9g violations=%zu\n",
              o.method.c_str(), model.q(), ds.n, objective_sum, viol.count);
  std::printf("wrote %s and %s\n", out_path(o.out_dir, "model.json").c_str(),
              out_path(o.out_dir, "fit_report.json").c_str());
  return 0;
}

// ---------------------------------------------------------------- sgp

struct SgpOptions {
  std::string model;
  std::string data;
  std::string policy = "require-monotone";
  std::string out_dir = ".";
  std::string config;
  std::string response = "y";
};

int run_sgp(const SgpOptions& o) {
  const QuantileModel model = qlab::load_model(o.model);
  const Dataset students =
      load_or_embedded(o.data, o.response, model.intercept, true);
  if (!model.feature_names.empty() && students.n > 0 &&
      students.feature_names != model.feature_names) {
    throw ValidationError(
        "student columns do not match the model's feature names");
  }
  const qlab::sgp::Policy policy = qlab::sgp::policy_from_string(o.policy);
  const std::string hash = qlab::report::config_hash(
      {{"command", "sgp"},
       {"model", o.model},
       {"data", o.data.empty() ? "embedded" : o.data},
       {"policy", o.policy},
       {"response", o.response}});

  qlab::sgp::BatchResult result;
  if (students.n > 0) {
    result = qlab::sgp::sgp_batch(model, students, TauGrid(model.taus), policy);
  }
  result.summary.n = students.n;

  qlab::sgp::write_sgp_csv(out_path(o.out_dir, "scores.csv"), result);
  ordered_json rep = ordered_json::parse(
      qlab::sgp::summary_to_json(result.summary));
  ordered_json doc;
  doc["format"] = "qlab-sgp-summary-v1";
  doc["tool_version"] = qlab::report::kToolVersion;
  doc["config_hash"] = hash;
  doc["policy"] = o.policy;
  for (auto& [k, v] : rep.items()) doc[k] = v;
  qlab::report::write_text_file(out_path(o.out_dir, "sgp_summary.json"),
                                doc.dump(2) + "\n");

  std::printf(
      "sgp: scored=%zu crossed=%zu frequency=%.4f max_violation=%.6g "
      "clamped=%zu refused=%zu\n",
      result.summary.n, result.summary.n_crossed,
      result.summary.crossing_frequency, result.summary.max_violation,
      result.summary.n_clamped, result.summary.n_errors);
  return 0;
}

// ------------------------------------------------------------ diagnose

struct DiagnoseOptions {
  std::string model;
  std::string data;
  std::string correction = "rearrange";
  std::string out_dir = ".";
  std::string config;
  std::string response = "y";
};

int run_diagnose(const DiagnoseOptions& o) {
  const QuantileModel model = qlab::load_model(o.model);
  const Dataset ds = load_or_embedded(o.data, o.response, model.intercept);
  const qlab::iso::Correction correction =
      qlab::iso::correction_from_string(o.correction);

  const std::vector<qlab::iso::CoverageRow> coverage =
      qlab::iso::quantile_property_gap(model, ds, correction);
  const qlab::cjqr::ViolationReport viol =
      qlab::cjqr::verify_noncrossing(model, ds);
  const qlab::sgp::BatchResult batch = qlab::sgp::sgp_batch(
      model, ds, TauGrid(model.taus), qlab::sgp::Policy::Rearrange);

  {
    std::ofstream out(out_path(o.out_dir, "coverage.csv"));
    if (!out) throw ValidationError("cannot write coverage.csv");
    out << "tau,coverage_before,coverage_after,gap_before,gap_after\n";
    char buf[160];
    for (const qlab::iso::CoverageRow& row : coverage) {
      std::snprintf(buf, sizeof(buf), "%.6g,%.12g,%.12g,%.12g,%.12g\n",
                    row.tau, row.coverage_before, row.coverage_after,
                    row.gap_before, row.gap_after);
      out << buf;
    }
  }

  ordered_json doc;
  doc["format"] = "qlab-diagnose-v1";
  doc["tool_version"] = qlab::report::kToolVersion;
  doc["config_hash"] = qlab::report::config_hash(
      {{"command", "diagnose"},
       {"model", o.model},
       {"data", o.data.empty() ? "embedded" : o.data},
       {"correction", o.correction},
       {"response", o.response}});
  doc["correction"] = o.correction;
  doc["rows"] = ds.n;
  doc["pair_violations"] = viol.count;
  doc["max_violation"] = viol.max_magnitude;
  doc["worst_row"] = viol.worst_row;
  doc["crossing_frequency"] = batch.summary.crossing_frequency;
  ordered_json cov = ordered_json::array();
  for (const qlab::iso::CoverageRow& row : coverage) {
    cov.push_back({{"tau", row.tau},
                   {"coverage_before", row.coverage_before},
                   {"coverage_after", row.coverage_after},
                   {"gap_before", row.gap_before},
                   {"gap_after", row.gap_after}});
  }
  doc["coverage"] = cov;
  qlab::report::write_text_file(out_path(o.out_dir, "diagnose.json"),
                                doc.dump(2) + "\n");

  std::printf("diagnose: rows=%zu pair_violations=%zu crossing_frequency=%.4f\n",
              ds.n, viol.count, batch.summary.crossing_frequency);
  std::printf("%-8s %16s %16s\n", "tau", "coverage_before", "coverage_after");
  for (const qlab::iso::CoverageRow& row : coverage) {
    std::printf("%-8.4f %16.4f %16.4f\n", row.tau, row.coverage_before,
                row.coverage_after);
  }
  return 0;
}

// --------------------------------------------------------------- bench

struct BenchOptions {
  std::string method = "independent";
  std::string n_list = "100,200,400";
  std::string q_list = "5";
  std::size_t repeats = 3;
  std::size_t gradient_iters = 50;
  long long seed = 1;
  std::string out_dir = ".";
  std::string config;
};

int run_bench(const BenchOptions& o) {
  const FitMethod method = qlab::fit_method_from_string(o.method);
  qlab::bench::ScalingOptions opts;
  opts.repeats = o.repeats;
  opts.gradient_iters = o.gradient_iters;
  if (o.seed < 0) throw ValidationError("seed must be >= 0");
  opts.seed = static_cast<std::uint32_t>(o.seed);
  const std::vector<qlab::bench::ScalingCell> cells = qlab::bench::scaling_run(
      method, parse_size_list("n", o.n_list), parse_size_list("q", o.q_list),
      opts);
  qlab::bench::write_scaling_csv(out_path(o.out_dir, "bench.csv"), cells);
  std::fputs(qlab::bench::summarize(cells).c_str(), stdout);
  std::printf("wrote %s\n", out_path(o.out_dir, "bench.csv").c_str());
  return 0;
}

// ----------------------------------------------------------- reproduce

struct ReproduceOptions {
  std::string out_dir = ".";
  long long seed = 42;
  std::string config;
};

int run_reproduce_cmd(const ReproduceOptions& o) {
  const qlab::report::ReproduceResult result =
      qlab::report::run_reproduce(o.seed);
  qlab::report::write_text_file(out_path(o.out_dir, "report.json"),
                                result.report_json);
  std::fputs(qlab::report::render_checks(result.checks).c_str(), stdout);
  std::printf("overall: %s\n", result.pass ? "PASS" : "FAIL");
  std::printf("wrote %s\n", out_path(o.out_dir, "report.json").c_str());
  return result.pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-quantile conditional estimation toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  FitOptions fo;
  CLI::App* fit = app.add_subcommand(
      "fit", "fit a quantile model; writes model.json and fit_report.json");
  fit->add_option("--data", fo.data,
                  "training CSV (default: embedded reference sample)");
  fit->add_option("--method", fo.method, "independent | cjqr | mqgd");
  fit->add_option("--taus", fo.taus,
                  "comma-separated levels in (0,1), or 'sgp' for 0.01..0.99");
  fit->add_option("--out-dir", fo.out_dir, "output directory");
  fit->add_option("--config", fo.config, "flat key=value config file");
  fit->add_option("--response", fo.response, "response column name");
  fit->add_flag("--intercept,!--no-intercept", fo.intercept,
                "include an intercept column (default on)");
  fit->add_option("--seed", fo.seed, "trainer seed (mqgd)");
  fit->add_option("--hidden-units", fo.hidden_units, "mqgd hidden width");
  fit->add_option("--max-iters", fo.max_iters, "mqgd iteration cap");
  fit->add_option("--patience", fo.patience, "mqgd plateau patience");
  fit->add_option("--min-improvement", fo.min_improvement,
                  "mqgd plateau threshold");
  fit->add_option("--learning-rate", fo.learning_rate,
                  "mqgd first-order learning rate");
  fit->add_option("--optimizer", fo.optimizer, "quasi-newton | first-order");
  ConfigBinding fit_keys;
  fit_keys.add("data", "--data", [&](const std::string& v) { fo.data = v; });
  fit_keys.add("method", "--method",
               [&](const std::string& v) { fo.method = v; });
  fit_keys.add("taus", "--taus", [&](const std::string& v) { fo.taus = v; });
  fit_keys.add("out-dir", "--out-dir",
               [&](const std::string& v) { fo.out_dir = v; });
  fit_keys.add("response", "--response",
               [&](const std::string& v) { fo.response = v; });
  fit_keys.add("intercept", "--intercept", [&](const std::string& v) {
    fo.intercept = to_bool("intercept", v);
  });
  fit_keys.add("seed", "--seed",
               [&](const std::string& v) { fo.seed = to_ll("seed", v); });
  fit_keys.add("hidden-units", "--hidden-units", [&](const std::string& v) {
    fo.hidden_units = to_sz("hidden-units", v);
  });
  fit_keys.add("max-iters", "--max-iters", [&](const std::string& v) {
    fo.max_iters = to_sz("max-iters", v);
  });
  fit_keys.add("patience", "--patience", [&](const std::string& v) {
    fo.patience = to_sz("patience", v);
  });
  fit_keys.add("min-improvement", "--min-improvement",
               [&](const std::string& v) {
                 fo.min_improvement = to_dbl("min-improvement", v);
               });
  fit_keys.add("learning-rate", "--learning-rate", [&](const std::string& v) {
    fo.learning_rate = to_dbl("learning-rate", v);
  });
  fit_keys.add("optimizer", "--optimizer",
               [&](const std::string& v) { fo.optimizer = v; });
  fit->callback([&]() {
    fit_keys.apply(fit, fo.config);
    exit_code = run_fit(fo);
  });

  SgpOptions so;
  CLI::App* sgp = app.add_subcommand(
      "sgp", "score students against a model; writes scores.csv and summary");
  sgp->add_option("--model", so.model, "model.json path")->required();
  sgp->add_option("--data", so.data,
                  "students CSV (default: embedded reference sample)");
  sgp->add_option("--policy", so.policy, "require-monotone | rearrange | pav");
  sgp->add_option("--out-dir", so.out_dir, "output directory");
  sgp->add_option("--config", so.config, "flat key=value config file");
  sgp->add_option("--response", so.response, "response column name");
  ConfigBinding sgp_keys;
  sgp_keys.add("model", "--model", [&](const std::string& v) { so.model = v; });
  sgp_keys.add("data", "--data", [&](const std::string& v) { so.data = v; });
  sgp_keys.add("policy", "--policy",
               [&](const std::string& v) { so.policy = v; });
  sgp_keys.add("out-dir", "--out-dir",
               [&](const std::string& v) { so.out_dir = v; });
  sgp_keys.add("response", "--response",
               [&](const std::string& v) { so.response = v; });
  sgp->callback([&]() {
    sgp_keys.apply(sgp, so.config);
    exit_code = run_sgp(so);
  });

  DiagnoseOptions dg;
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "coverage and crossing tables for a fitted model");
  diagnose->add_option("--model", dg.model, "model.json path")->required();
  diagnose->add_option("--data", dg.data,
                       "evaluation CSV (default: embedded reference sample)");
  diagnose->add_option("--correction", dg.correction,
                       "none | rearrange | pav");
  diagnose->add_option("--out-dir", dg.out_dir, "output directory");
  diagnose->add_option("--config", dg.config, "flat key=value config file");
  diagnose->add_option("--response", dg.response, "response column name");
  ConfigBinding dg_keys;
  dg_keys.add("model", "--model", [&](const std::string& v) { dg.model = v; });
  dg_keys.add("data", "--data", [&](const std::string& v) { dg.data = v; });
  dg_keys.add("correction", "--correction",
              [&](const std::string& v) { dg.correction = v; });
  dg_keys.add("out-dir", "--out-dir",
              [&](const std::string& v) { dg.out_dir = v; });
  dg_keys.add("response", "--response",
              [&](const std::string& v) { dg.response = v; });
  diagnose->callback([&]() {
    dg_keys.apply(diagnose, dg.config);
    exit_code = run_diagnose(dg);
  });

  BenchOptions bo;
  CLI::App* bench = app.add_subcommand(
      "bench", "scaling harness; writes bench.csv and prints slopes");
  bench->add_option("--method", bo.method, "independent | cjqr | mqgd");
  bench->add_option("--n-list", bo.n_list, "comma-separated sample sizes");
  bench->add_option("--q-list", bo.q_list, "comma-separated level counts");
  bench->add_option("--repeats", bo.repeats, "timed repeats per cell");
  bench->add_option("--gradient-iters", bo.gradient_iters,
                    "fixed iteration budget for mqgd cells");
  bench->add_option("--seed", bo.seed, "synthetic data seed");
  bench->add_option("--out-dir", bo.out_dir, "output directory");
  bench->add_option("--config", bo.config, "flat key=value config file");
  ConfigBinding bench_keys;
  bench_keys.add("method", "--method",
                 [&](const std::string& v) { bo.method = v; });
  bench_keys.add("n-list", "--n-list",
                 [&](const std::string& v) { bo.n_list = v; });
  bench_keys.add("q-list", "--q-list",
                 [&](const std::string& v) { bo.q_list = v; });
  bench_keys.add("repeats", "--repeats", [&](const std::string& v) {
    bo.repeats = to_sz("repeats", v);
  });
  bench_keys.add("gradient-iters", "--gradient-iters",
                 [&](const std::string& v) {
                   bo.gradient_iters = to_sz("gradient-iters", v);
                 });
  bench_keys.add("seed", "--seed",
                 [&](const std::string& v) { bo.seed = to_ll("seed", v); });
  bench_keys.add("out-dir", "--out-dir",
                 [&](const std::string& v) { bo.out_dir = v; });
  bench->callback([&]() {
    bench_keys.apply(bench, bo.config);
    exit_code = run_bench(bo);
  });

  ReproduceOptions ro;
  CLI::App* reproduce = app.add_subcommand(
      "reproduce",
      "run all three methods on the embedded sample and check tolerances");
  reproduce->add_option("--out-dir", ro.out_dir, "output directory");
  reproduce->add_option("--seed", ro.seed, "trainer seed");
  reproduce->add_option("--config", ro.config, "flat key=value config file");
  ConfigBinding rep_keys;
  rep_keys.add("out-dir", "--out-dir",
               [&](const std::string& v) { ro.out_dir = v; });
  rep_keys.add("seed", "--seed",
               [&](const std::string& v) { ro.seed = to_ll("seed", v); });
  reproduce->callback([&]() {
    rep_keys.apply(reproduce, ro.config);
    exit_code = run_reproduce_cmd(ro);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
