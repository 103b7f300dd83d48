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
#include <cstdint>
#include <vector>

#include "gkst/errors.hpp"
#include "gkst/graph.hpp"

namespace gkst {

// Edge counts by endpoint group: r(i, i) counts edges within group i,
// r(i, j) = r(j, i) counts edges joining groups i and j. The diagonal plus
// the strict upper triangle sums to the number of edges.
struct EdgeCounts {
  Eigen::MatrixXi r;

  int groups() const { return static_cast<int>(r.rows()); }

  std::int64_t total() const {
    std::int64_t t = 0;
    for (int i = 0; i < groups(); ++i) {
      for (int j = i; j < groups(); ++j) t += r(i, j);
    }
    return t;
  }
};

// Counts graph edges by the groups of their endpoints. K fixes the matrix
// size; labels must lie in [0, K).
inline EdgeCounts count_edges(const SimilarityGraph& g, const std::vector<int>& labels, int K) {
  if (static_cast<int>(labels.size()) != g.n) {
    throw input_error("count_edges: labels length must equal the node count");
  }
  if (K < 1) throw input_error("count_edges: K must be >= 1");
  for (const int lab : labels) {
    if (lab < 0 || lab >= K) throw input_error("count_edges: label out of range");
  }
  EdgeCounts c{Eigen::MatrixXi::Zero(K, K)};
  for (const auto& [u, v] : g.edges) {
    const int a = labels[static_cast<std::size_t>(u)];
    const int b = labels[static_cast<std::size_t>(v)];
    if (a == b) {
      ++c.r(a, a);
    } else {
      ++c.r(a, b);
      ++c.r(b, a);
    }
  }
  return c;
}

// K inferred as max(label) + 1, with every group nonempty.
inline EdgeCounts count_edges(const SimilarityGraph& g, const std::vector<int>& labels) {
  return count_edges(g, labels, static_cast<int>(group_sizes_from_labels(labels).size()));
}

}  // namespace gkst
