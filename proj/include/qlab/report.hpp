// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qlab::report {

inline constexpr const char* kToolVersion = "1.0.0";

std::uint64_t fnv1a64(const std::string& text);

// Canonical hash of an effective configuration: pairs are sorted by
// key, joined as key=value lines, and FNV-1a hashed to 16 hex digits.
std::string config_hash(
    std::vector<std::pair<std::string, std::string>> entries);

struct CheckRow {
  std::string name;
  bool pass = false;
  bool warn_only = false;  // reported but never fails the run
  std::string detail;
};

// Consolidated reproduction of the reference analysis: all three fit
// methods on the embedded twenty-row sample at tau = 0.10, 0.15, the
// evaluation chain on the published coefficient rows, the derived
// crossing abscissa, coverage, and tolerance checks. The JSON is fully
// deterministic (no timestamps, no wall-clock fields), so repeated runs
// produce identical bytes.
struct ReproduceResult {
  std::string report_json;
  std::vector<CheckRow> checks;
  bool pass = false;  // every non-warn check passed
};

ReproduceResult run_reproduce(long long seed = 42);

void write_text_file(const std::string& path, const std::string& content);

// One line per check: [PASS]/[WARN]/[FAIL] name: detail.
std::string render_checks(const std::vector<CheckRow>& checks);

}  // namespace qlab::report
