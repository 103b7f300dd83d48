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
#include <string>
#include <vector>

#include "gkst/errors.hpp"

namespace gkst {

// Per-group counts from a 0-based label vector. The number of groups is
// max(label) + 1; every group below it must be nonempty.
inline std::vector<int> group_sizes_from_labels(const std::vector<int>& labels) {
  if (labels.empty()) throw input_error("labels: must be nonempty");
  int max_label = 0;
  for (const int lab : labels) {
    if (lab < 0) throw input_error("labels: label out of range (negative)");
    if (lab > max_label) max_label = lab;
  }
  if (max_label >= static_cast<int>(labels.size())) {
    throw input_error("labels: label out of range (exceeds N - 1)");
  }
  std::vector<int> sizes(static_cast<std::size_t>(max_label) + 1, 0);
  for (const int lab : labels) ++sizes[static_cast<std::size_t>(lab)];
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) {
      throw input_error("labels: group " + std::to_string(i) + " is empty");
    }
  }
  return sizes;
}

// Pooled observations with group membership. Rows of `points` are
// observations; `labels` holds 0-based group ids and every group
// 0 .. groups()-1 is nonempty.
struct Dataset {
  Eigen::MatrixXd points;   // N x d
  std::vector<int> labels;  // size N

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  int groups() const { return static_cast<int>(group_sizes().size()); }
  std::vector<int> group_sizes() const { return group_sizes_from_labels(labels); }

  void validate() const {
    if (points.rows() < 1) throw input_error("dataset: no observations");
    if (points.cols() < 1) throw input_error("dataset: no coordinates");
    if (static_cast<int>(labels.size()) != n()) {
      throw input_error("dataset: labels length must equal the number of rows");
    }
    if (!points.allFinite()) throw input_error("dataset: non-finite coordinate");
    group_sizes();  // throws on bad labels
  }
};

}  // namespace gkst
