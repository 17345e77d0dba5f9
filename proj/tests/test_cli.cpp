// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef _WIN32
#include <sys/wait.h>
#endif

#include "doctest.h"
#include "qlab/dataset.hpp"
#include "qlab/model.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kScratch = "cli_scratch";

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::create_directories(kScratch);
  const fs::path log = kScratch / ("run_" + std::to_string(counter++) + ".log");
  const std::string cmd =
      std::string(QLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
#ifdef _WIN32
  r.code = status;
#else
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
#endif
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (!line.empty()) ++rows;
  }
  return rows;
}

std::string dir(const std::string& name) {
  return (kScratch / name).string();
}

}  // namespace

TEST_CASE("help exits zero") {
  const RunResult r = run_cli("--help");
  CHECK(r.code == 0);
  CHECK(r.output.find("fit") != std::string::npos);
  CHECK(r.output.find("reproduce") != std::string::npos);
}

TEST_CASE("fit writes a loadable model and report") {
  const std::string out = dir("fit_ind");
  const RunResult r =
      run_cli("fit --taus 0.10,0.15 --out-dir " + out);
  REQUIRE(r.code == 0);

  const qlab::QuantileModel m = qlab::load_model(out + "/model.json");
  REQUIRE(m.taus.size() == 2);
  CHECK(m.taus[0] == 0.10);
  CHECK(m.taus[1] == 0.15);
  CHECK(m.method == qlab::FitMethod::IndependentQR);
  CHECK(m.p == 2);

  const std::string report = slurp(out + "/fit_report.json");
  CHECK(report.find("\"format\": \"qlab-fit-report-v1\"") != std::string::npos);
  CHECK(report.find("\"objective_sum\"") != std::string::npos);
}

TEST_CASE("fit cjqr records joint solver stats") {
  const std::string out = dir("fit_cjqr");
  const RunResult r =
      run_cli("fit --method cjqr --taus 0.10,0.15 --out-dir " + out);
  REQUIRE(r.code == 0);
  const qlab::QuantileModel m = qlab::load_model(out + "/model.json");
  CHECK(m.method == qlab::FitMethod::CJQR);
  const std::string report = slurp(out + "/fit_report.json");
  CHECK(report.find("\"joint\"") != std::string::npos);
  CHECK(report.find("\"lp_vars\": 84") != std::string::npos);
}

TEST_CASE("fit mqgd writes a trace") {
  const std::string out = dir("fit_mqgd");
  const RunResult r = run_cli(
      "fit --method mqgd --taus 0.10,0.15 --max-iters 400 --patience 200 "
      "--out-dir " + out);
  REQUIRE(r.code == 0);
  std::ifstream trace(out + "/trace.csv");
  REQUIRE(trace.good());
  std::string header;
  std::getline(trace, header);
  CHECK(header == "iteration,loss");
  CHECK(data_rows(out + "/trace.csv") >= 1);

  // hidden networks are a library-only feature; model files stay linear
  const RunResult hidden = run_cli(
      "fit --method mqgd --hidden-units 3 --taus 0.10,0.15 --out-dir " +
      dir("fit_hidden"));
  CHECK(hidden.code == 2);
}

TEST_CASE("sgp scores the bundled sample against a fitted model") {
  const std::string fit_out = dir("sgp_model");
  REQUIRE(run_cli("fit --method cjqr --taus 0.10,0.15 --out-dir " + fit_out)
              .code == 0);

  const std::string out = dir("sgp_run");
  const RunResult r = run_cli("sgp --model " + fit_out +
                              "/model.json --policy require-monotone "
                              "--out-dir " + out);
  REQUIRE(r.code == 0);
  CHECK(data_rows(out + "/scores.csv") == 20);
  const std::string summary = slurp(out + "/sgp_summary.json");
  CHECK(summary.find("\"format\": \"qlab-sgp-summary-v1\"") !=
        std::string::npos);
  CHECK(summary.find("\"n\": 20") != std::string::npos);
  CHECK(summary.find("\"n_errors\": 0") != std::string::npos);
}

TEST_CASE("sgp with a header-only roster is empty but valid") {
  const std::string fit_out = dir("sgp_model2");
  REQUIRE(run_cli("fit --taus 0.10,0.15 --out-dir " + fit_out).code == 0);

  const fs::path roster = kScratch / "empty_roster.csv";
  {
    std::ofstream f(roster);
    f << "x,y\n";
  }
  const std::string out = dir("sgp_empty");
  const RunResult r = run_cli("sgp --model " + fit_out + "/model.json --data " +
                              roster.string() + " --out-dir " + out);
  REQUIRE(r.code == 0);
  CHECK(data_rows(out + "/scores.csv") == 0);
  CHECK(slurp(out + "/sgp_summary.json").find("\"n\": 0") != std::string::npos);
}

TEST_CASE("sgp rejects a roster with foreign columns") {
  const std::string fit_out = dir("sgp_model3");
  REQUIRE(run_cli("fit --taus 0.10,0.15 --out-dir " + fit_out).code == 0);

  const fs::path roster = kScratch / "foreign_roster.csv";
  {
    std::ofstream f(roster);
    f << "z,y\n1.0,2.0\n";
  }
  const RunResult r = run_cli("sgp --model " + fit_out + "/model.json --data " +
                              roster.string() + " --out-dir " +
                              dir("sgp_foreign"));
  CHECK(r.code == 2);
}

TEST_CASE("diagnose writes the coverage table") {
  const std::string fit_out = dir("diag_model");
  REQUIRE(run_cli("fit --taus 0.10,0.15 --out-dir " + fit_out).code == 0);

  const std::string out = dir("diag_run");
  const RunResult r = run_cli("diagnose --model " + fit_out +
                              "/model.json --correction rearrange --out-dir " +
                              out);
  REQUIRE(r.code == 0);
  const std::string csv = slurp(out + "/coverage.csv");
  CHECK(csv.rfind("tau,coverage_before,coverage_after,gap_before,gap_after",
                  0) == 0);
  CHECK(data_rows(out + "/coverage.csv") == 2);
  const std::string doc = slurp(out + "/diagnose.json");
  CHECK(doc.find("\"format\": \"qlab-diagnose-v1\"") != std::string::npos);
  CHECK(doc.find("\"pair_violations\"") != std::string::npos);
}

TEST_CASE("bench runs a tiny grid") {
  const std::string out = dir("bench_run");
  const RunResult r = run_cli(
      "bench --method independent --n-list 50,100 --q-list 2 --repeats 1 "
      "--out-dir " + out);
  REQUIRE(r.code == 0);
  CHECK(data_rows(out + "/bench.csv") == 2);
  CHECK(r.output.find("slope") != std::string::npos);
}

TEST_CASE("validation failures exit with code 2") {
  CHECK(run_cli("fit --taus 0.15,0.10").code == 2);   // not increasing
  CHECK(run_cli("fit --taus 1.5").code == 2);         // outside (0,1)
  CHECK(run_cli("fit --method nope").code == 2);      // unknown method
  CHECK(run_cli("sgp").code == 2);                    // missing --model
  CHECK(run_cli("frobnicate").code == 2);             // unknown subcommand
  CHECK(run_cli("").code == 2);                       // subcommand required
  CHECK(run_cli("sgp --model does_not_exist.json --out-dir " +
                dir("sgp_missing"))
            .code == 2);
}

TEST_CASE("reproduce is deterministic and reports through the exit code") {
  const std::string out1 = dir("rep1");
  const std::string out2 = dir("rep2");
  const RunResult r1 = run_cli("reproduce --out-dir " + out1);
  const RunResult r2 = run_cli("reproduce --out-dir " + out2);

  // the published-analysis checks are encoded faithfully; the runs that
  // disagree with the printed values surface as a FAIL exit
  CHECK(r1.code == 4);
  CHECK(r1.output.find("overall:") != std::string::npos);

  const std::string a = slurp(out1 + "/report.json");
  const std::string b = slurp(out2 + "/report.json");
  REQUIRE_FALSE(a.empty());
  CHECK(a == b);  // byte-identical reruns
  CHECK(r2.code == r1.code);
}

TEST_CASE("config file fills defaults; flags win") {
  const fs::path cfg = kScratch / "fit.conf";
  {
    std::ofstream f(cfg);
    f << "# comment line\n";
    f << "taus=0.20,0.40\n";
    f << "method=independent\n";
  }

  const std::string out1 = dir("cfg_only");
  REQUIRE(run_cli("fit --config " + cfg.string() + " --out-dir " + out1)
              .code == 0);
  const qlab::QuantileModel m1 = qlab::load_model(out1 + "/model.json");
  REQUIRE(m1.taus.size() == 2);
  CHECK(m1.taus[0] == 0.20);
  CHECK(m1.taus[1] == 0.40);

  const std::string out2 = dir("cfg_override");
  REQUIRE(run_cli("fit --config " + cfg.string() +
                  " --taus 0.10,0.15 --out-dir " + out2)
              .code == 0);
  const qlab::QuantileModel m2 = qlab::load_model(out2 + "/model.json");
  CHECK(m2.taus[0] == 0.10);
  CHECK(m2.taus[1] == 0.15);

  const fs::path bad = kScratch / "bad.conf";
  {
    std::ofstream f(bad);
    f << "frobnication=3\n";
  }
  CHECK(run_cli("fit --config " + bad.string()).code == 2);
}

TEST_CASE("csv in, csv out") {
  const fs::path roster = kScratch / "sample.csv";
  qlab::write_csv(roster.string(), qlab::reference_dataset(), "y");

  const std::string out = dir("fit_csv");
  const RunResult r = run_cli("fit --data " + roster.string() +
                              " --taus 0.10,0.15 --out-dir " + out);
  REQUIRE(r.code == 0);
  const qlab::QuantileModel m = qlab::load_model(out + "/model.json");
  CHECK(m.feature_names == qlab::reference_dataset().feature_names);
}

TEST_CASE("thread override is accepted") {
  const std::string out = dir("fit_threads");
#ifdef _WIN32
  const RunResult r = run_cli("fit --taus 0.10,0.15 --out-dir " + out);
#else
  const std::string cmd = "QLAB_THREADS=2 " + std::string(QLAB_CLI_PATH) +
                          " fit --taus 0.10,0.15 --out-dir " + out;
  RunResult r;
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
#endif
  CHECK(r.code == 0);
  CHECK(fs::exists(out + "/model.json"));
}
