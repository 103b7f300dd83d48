// Copyright 2026 The gkst authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gkst/dataset.hpp"
#include "gkst/errors.hpp"

namespace gkst {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  double value = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw input_error(where + ": cannot parse '" + s + "' as a number");
  }
  return value;
}

// Reads nonempty lines; skips a UTF-8 BOM if present.
inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first && line.size() >= 3 && line[0] == '\xef' && line[1] == '\xbb' && line[2] == '\xbf') {
      line = line.substr(3);
    }
    first = false;
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

// Dataset plus the original label strings; group i corresponds to
// label_names[i], in order of first appearance.
struct LoadedDataset {
  Dataset data;
  std::vector<std::string> label_names;
};

// Maps arbitrary label strings to 0-based ids in first-appearance order.
inline std::pair<std::vector<int>, std::vector<std::string>> index_labels(
    const std::vector<std::string>& raw) {
  std::vector<int> ids;
  std::vector<std::string> names;
  std::unordered_map<std::string, int> seen;
  ids.reserve(raw.size());
  for (const auto& lab : raw) {
    const auto [it, inserted] = seen.emplace(lab, static_cast<int>(names.size()));
    if (inserted) names.push_back(lab);
    ids.push_back(it->second);
  }
  return {std::move(ids), std::move(names)};
}

// Feature CSV: header row naming the columns, one observation per row. The
// column named `label_col` carries the group label; all other columns must
// be numeric.
inline LoadedDataset read_feature_csv(const std::string& path, const std::string& label_col) {
  const auto lines = detail::read_lines(path);
  if (lines.size() < 2) throw input_error(path + ": need a header row and at least one data row");
  const auto header = detail::split_csv_line(lines[0]);
  int label_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_col) {
      if (label_idx >= 0) throw input_error(path + ": duplicate label column '" + label_col + "'");
      label_idx = static_cast<int>(c);
    }
  }
  if (label_idx < 0) throw input_error(path + ": no column named '" + label_col + "'");
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1) throw input_error(path + ": no feature columns");

  const int n = static_cast<int>(lines.size()) - 1;
  Eigen::MatrixXd points(n, d);
  std::vector<std::string> raw_labels;
  raw_labels.reserve(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    const auto fields = detail::split_csv_line(lines[static_cast<std::size_t>(r) + 1]);
    if (fields.size() != header.size()) {
      throw input_error(path + ": row " + std::to_string(r + 2) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    int col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (static_cast<int>(c) == label_idx) {
        raw_labels.push_back(fields[c]);
      } else {
        points(r, col++) = detail::parse_double(
            fields[c], path + ": row " + std::to_string(r + 2));
      }
    }
  }

  LoadedDataset out;
  auto [ids, names] = index_labels(raw_labels);
  out.data.points = std::move(points);
  out.data.labels = std::move(ids);
  out.label_names = std::move(names);
  out.data.validate();
  return out;
}

// Distance CSV: square numeric matrix, no header.
inline Eigen::MatrixXd read_distance_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw input_error(path + ": empty file");
  const int n = static_cast<int>(lines.size());
  Eigen::MatrixXd m(n, n);
  for (int r = 0; r < n; ++r) {
    const auto fields = detail::split_csv_line(lines[static_cast<std::size_t>(r)]);
    if (static_cast<int>(fields.size()) != n) {
      throw input_error(path + ": row " + std::to_string(r + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " + std::to_string(n) +
                        " (square matrix, no header)");
    }
    for (int c = 0; c < n; ++c) {
      m(r, c) = detail::parse_double(fields[static_cast<std::size_t>(c)],
                                     path + ": row " + std::to_string(r + 1));
    }
  }
  return m;
}

// Label file: one label per line, aligned with the distance matrix rows.
inline std::vector<std::string> read_label_lines(const std::string& path) {
  auto lines = detail::read_lines(path);
  for (auto& line : lines) line = detail::trim(line);
  if (lines.empty()) throw input_error(path + ": empty label file");
  return lines;
}

}  // namespace gkst
