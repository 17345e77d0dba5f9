// SPDX-License-Identifier: Apache-2.0
#include "qlab/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace qlab {

void Dataset::validate() const {
  if (p < 1) throw ValidationError("dataset has no columns");
  if (n < p) {
    throw ValidationError("dataset has fewer rows (" + std::to_string(n) +
                          ") than columns (" + std::to_string(p) + ")");
  }
  if (x.size() != n * p || y.size() != n) {
    throw ValidationError("dataset storage does not match declared shape");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      if (!std::isfinite(xat(i, k))) {
        throw ValidationError("non-finite feature value at row " +
                              std::to_string(i + 1) + ", column " +
                              std::to_string(k + 1));
      }
    }
    if (!std::isfinite(y[i])) {
      throw ValidationError("non-finite response value at row " +
                            std::to_string(i + 1));
    }
    if (intercept && xat(i, 0) != 1.0) {
      throw ValidationError("intercept column is not 1.0 at row " +
                            std::to_string(i + 1));
    }
  }
}

TauGrid::TauGrid(std::vector<double> t) : taus(std::move(t)) {
  if (taus.empty()) throw ValidationError("tau grid is empty");
  double prev = 0.0;
  for (double tau : taus) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw ValidationError("tau " + std::to_string(tau) +
                            " outside the open interval (0,1)");
    }
    if (tau <= prev) {
      throw ValidationError("tau grid must be strictly increasing");
    }
    prev = tau;
  }
}

TauGrid TauGrid::percentile_grid() {
  std::vector<double> t;
  t.reserve(99);
  for (int k = 1; k <= 99; ++k) t.push_back(k / 100.0);
  return TauGrid(std::move(t));
}

Dataset make_dataset(const std::vector<std::vector<double>>& feature_values,
                     const std::vector<double>& response,
                     const std::vector<std::string>& feature_names,
                     bool intercept) {
  Dataset ds;
  ds.n = response.size();
  const std::size_t f = feature_values.size();
  if (feature_names.size() != f) {
    throw ValidationError("feature name count does not match feature count");
  }
  for (const auto& col : feature_values) {
    if (col.size() != ds.n) {
      throw ValidationError("feature columns have inconsistent lengths");
    }
  }
  ds.intercept = intercept;
  ds.p = f + (intercept ? 1 : 0);
  ds.x.resize(ds.n * ds.p);
  for (std::size_t i = 0; i < ds.n; ++i) {
    std::size_t k = 0;
    if (intercept) ds.x[i * ds.p + k++] = 1.0;
    for (std::size_t c = 0; c < f; ++c) ds.x[i * ds.p + k++] = feature_values[c][i];
  }
  ds.y = response;
  if (intercept) ds.feature_names.push_back("(intercept)");
  for (const auto& nm : feature_names) ds.feature_names.push_back(nm);
  ds.validate();
  return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, std::size_t line_no,
                  const std::string& col) {
  if (cell.empty()) {
    throw ValidationError("empty cell in column '" + col + "' at line " +
                          std::to_string(line_no));
  }
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
    throw ValidationError("non-numeric cell '" + cell + "' in column '" + col +
                          "' at line " + std::to_string(line_no));
  }
  if (!std::isfinite(v)) {
    throw ValidationError("non-finite cell '" + cell + "' in column '" + col +
                          "' at line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& response_column,
                 bool intercept, bool allow_empty) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty file: " + path);
  const std::vector<std::string> header = split_csv_line(line);
  std::ptrdiff_t ycol = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == response_column) {
      ycol = static_cast<std::ptrdiff_t>(c);
      break;
    }
  }
  if (ycol < 0) {
    throw ValidationError("response column '" + response_column +
                          "' not found in " + path);
  }
  std::vector<std::string> feat_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) != ycol) feat_names.push_back(header[c]);
  }
  std::vector<std::vector<double>> feats(feat_names.size());
  std::vector<double> resp;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
    }
    std::size_t f = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = parse_cell(cells[c], line_no, header[c]);
      if (static_cast<std::ptrdiff_t>(c) == ycol) {
        resp.push_back(v);
      } else {
        feats[f++].push_back(v);
      }
    }
  }
  if (resp.empty()) {
    if (!allow_empty) throw ValidationError("no data rows in " + path);
    Dataset ds;
    ds.n = 0;
    ds.p = feat_names.size() + (intercept ? 1 : 0);
    ds.intercept = intercept;
    if (intercept) ds.feature_names.push_back("(intercept)");
    for (const auto& nm : feat_names) ds.feature_names.push_back(nm);
    return ds;
  }
  return make_dataset(feats, resp, feat_names, intercept);
}

void write_csv(const std::string& path, const Dataset& ds,
               const std::string& response_column) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  const std::size_t first = ds.intercept ? 1 : 0;
  for (std::size_t k = first; k < ds.p; ++k) {
    out << ds.feature_names[k] << ',';
  }
  out << response_column << '\n';
  char buf[40];
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t k = first; k < ds.p; ++k) {
      std::snprintf(buf, sizeof buf, "%.12g", ds.xat(i, k));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.12g", ds.y[i]);
    out << buf << '\n';
  }
}

Dataset reference_dataset() {
  static const std::vector<double> xs = {
      0.2095, 0.6809, 1.2936, 1.8535, 2.3583, 2.4368, 2.8754,
      4.1162, 4.567,  4.7146, 4.8946, 4.9042, 5.8864, 6.205,
      6.3962, 7.5324, 7.7828, 8.4835, 9.4854, 9.9582};
  static const std::vector<double> ys = {
      1.77268,  2.529927, 2.00102,  2.101015, 2.494044,
      2.164226, 2.44769,  2.574242, 4.314459, 1.569597,
      2.467982, 2.153414, 1.925144, 1.679639, 4.556762,
      3.509959, 3.522292, 3.099583, 0.368901, 3.069406};
  return make_dataset({xs}, ys, {"x"}, true);
}

}  // namespace qlab
