// SPDX-License-Identifier: Apache-2.0
#include "qlab/isotonize.hpp"

#include <algorithm>
#include <cmath>

namespace qlab::iso {

std::string to_string(Correction c) {
  switch (c) {
    case Correction::None: return "none";
    case Correction::Rearrange: return "rearrange";
    case Correction::Pav: return "pav";
  }
  return "none";
}

Correction correction_from_string(const std::string& s) {
  if (s == "none") return Correction::None;
  if (s == "rearrange") return Correction::Rearrange;
  if (s == "pav") return Correction::Pav;
  throw ValidationError("unknown correction '" + s +
                        "' (expected none, rearrange, or pav)");
}

QuantileSheet rearrange(const QuantileSheet& sheet) {
  QuantileSheet out = sheet;
  std::sort(out.values.begin(), out.values.end());
  out.isotonized = true;
  return out;
}

std::vector<double> pav(const std::vector<double>& values,
                        const std::vector<double>& weights) {
  const std::size_t q = values.size();
  if (!weights.empty() && weights.size() != q) {
    throw ValidationError("weight vector length does not match values");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw ValidationError("PAV weights must be positive");
  }
  // block stack: level, weight, extent
  std::vector<double> level(q), weight(q);
  std::vector<std::size_t> count(q);
  std::size_t top = 0;
  for (std::size_t i = 0; i < q; ++i) {
    level[top] = values[i];
    weight[top] = weights.empty() ? 1.0 : weights[i];
    count[top] = 1;
    ++top;
    while (top > 1 && level[top - 2] > level[top - 1]) {
      const double w = weight[top - 2] + weight[top - 1];
      level[top - 2] =
          (level[top - 2] * weight[top - 2] + level[top - 1] * weight[top - 1]) /
          w;
      weight[top - 2] = w;
      count[top - 2] += count[top - 1];
      --top;
    }
  }
  std::vector<double> out;
  out.reserve(q);
  for (std::size_t blk = 0; blk < top; ++blk) {
    out.insert(out.end(), count[blk], level[blk]);
  }
  return out;
}

QuantileSheet pav_project(const QuantileSheet& sheet,
                          const std::vector<double>& weights) {
  QuantileSheet out = sheet;
  out.values = pav(sheet.values, weights);
  out.isotonized = true;
  return out;
}

std::vector<CoverageRow> quantile_property_gap(const QuantileModel& model,
                                               const Dataset& ds,
                                               Correction method) {
  if (model.p != ds.p) {
    throw ValidationError("model and dataset disagree on column count");
  }
  const std::size_t q = model.q();
  std::vector<std::size_t> covered_before(q, 0), covered_after(q, 0);
  for (std::size_t i = 0; i < ds.n; ++i) {
    const QuantileSheet raw =
        predict(model, std::vector<double>(ds.row(i), ds.row(i) + ds.p));
    QuantileSheet fixed = raw;
    if (method == Correction::Rearrange) fixed = rearrange(raw);
    if (method == Correction::Pav) fixed = pav_project(raw);
    for (std::size_t j = 0; j < q; ++j) {
      if (ds.y[i] <= raw.values[j] + 1e-9) ++covered_before[j];
      if (ds.y[i] <= fixed.values[j] + 1e-9) ++covered_after[j];
    }
  }
  std::vector<CoverageRow> rows(q);
  for (std::size_t j = 0; j < q; ++j) {
    rows[j].tau = model.taus[j];
    rows[j].coverage_before =
        static_cast<double>(covered_before[j]) / static_cast<double>(ds.n);
    rows[j].coverage_after =
        static_cast<double>(covered_after[j]) / static_cast<double>(ds.n);
    rows[j].gap_before = std::fabs(rows[j].coverage_before - model.taus[j]);
    rows[j].gap_after = std::fabs(rows[j].coverage_after - model.taus[j]);
  }
  return rows;
}

}  // namespace qlab::iso
