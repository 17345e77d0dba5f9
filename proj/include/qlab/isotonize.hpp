// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "qlab/dataset.hpp"
#include "qlab/model.hpp"

namespace qlab::iso {

enum class Correction { None, Rearrange, Pav };

std::string to_string(Correction c);
Correction correction_from_string(const std::string& s);

// Monotone rearrangement: ascending sort of the sheet values. Preserves
// the value multiset.
QuantileSheet rearrange(const QuantileSheet& sheet);

// Weighted least-squares projection onto the nondecreasing cone
// (pool-adjacent-violators). Unit weights when the weight vector is
// empty. Preserves the weighted mean.
QuantileSheet pav_project(const QuantileSheet& sheet,
                          const std::vector<double>& weights = {});

// Plain-vector PAV used by the sheet wrapper and the tests.
std::vector<double> pav(const std::vector<double>& values,
                        const std::vector<double>& weights);

struct CoverageRow {
  double tau = 0.0;
  double coverage_before = 0.0;
  double coverage_after = 0.0;
  double gap_before = 0.0;
  double gap_after = 0.0;
};

// Empirical coverage #{i: y_i <= Q(tau_j | x_i)} / n per tau, before and
// after the chosen correction applied to each row's predicted sheet.
// Responses within 1e-9 of the fitted value count as covered.
std::vector<CoverageRow> quantile_property_gap(const QuantileModel& model,
                                               const Dataset& ds,
                                               Correction method);

}  // namespace qlab::iso
