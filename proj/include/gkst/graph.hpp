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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gkst/distance.hpp"
#include "gkst/errors.hpp"

namespace gkst {

namespace detail {

// Union-find with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  void reset() {
    std::iota(parent_.begin(), parent_.end(), 0);
    std::fill(size_.begin(), size_.end(), 1);
  }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Joins the components of a and b; false if already joined.
  bool unite(int a, int b) {
    int ra = find(a);
    int rb = find(b);
    if (ra == rb) return false;
    if (size_[ra] < size_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    size_[ra] += size_[rb];
    return true;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace detail

// Undirected simple graph on nodes 0 .. n-1, stored as a sorted list of
// edges (u, v) with u < v.
struct SimilarityGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  std::int64_t edge_count() const { return static_cast<std::int64_t>(edges.size()); }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const auto& [u, v] : edges) {
      ++deg[static_cast<std::size_t>(u)];
      ++deg[static_cast<std::size_t>(v)];
    }
    return deg;
  }

  void validate() const {
    if (n < 1) throw input_error("graph: must have at least one node");
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n) throw input_error("graph: edge endpoint out of range");
      if (u >= v) throw input_error("graph: edges must satisfy u < v");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (edges[i] <= edges[i - 1]) throw input_error("graph: edges must be sorted and distinct");
    }
  }

  // Canonicalizes an externally supplied edge list: orients, sorts,
  // validates. Duplicate edges are rejected.
  static SimilarityGraph from_edges(int n, std::vector<std::pair<int, int>> edges) {
    for (auto& [u, v] : edges) {
      if (u == v) throw input_error("graph: self loop");
      if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    SimilarityGraph g{n, std::move(edges)};
    g.validate();
    return g;
  }
};

// Union of k edge-disjoint minimum spanning trees: tree j is the MST of the
// complete graph with the edges of trees 1 .. j-1 removed. Kruskal with ties
// broken by (weight, smaller endpoint, larger endpoint), so the result is
// unique and deterministic for any input.
inline SimilarityGraph build_kmst(const DistanceMatrix& dist, int k) {
  const int n = dist.size();
  if (k < 1) throw input_error("build_kmst: k must be >= 1");
  if (n < 2) throw input_error("build_kmst: need at least 2 observations");

  struct Candidate {
    double w;
    int u, v;
  };
  std::vector<Candidate> cand;
  cand.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      cand.push_back({dist(u, v), u, v});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.w, a.u, a.v) < std::tie(b.w, b.u, b.v);
  });

  std::vector<char> used(cand.size(), 0);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(k) * (n - 1));
  detail::UnionFind uf(n);
  for (int tree = 0; tree < k; ++tree) {
    uf.reset();
    int taken = 0;
    for (std::size_t idx = 0; idx < cand.size() && taken < n - 1; ++idx) {
      if (used[idx]) continue;
      if (uf.unite(cand[idx].u, cand[idx].v)) {
        used[idx] = 1;
        edges.emplace_back(cand[idx].u, cand[idx].v);
        ++taken;
      }
    }
    if (taken < n - 1) {
      throw construction_error("build_kmst: tree " + std::to_string(tree + 1) +
                               " cannot span; k exceeds the available edge-disjoint trees");
    }
  }
  std::sort(edges.begin(), edges.end());
  SimilarityGraph g{n, std::move(edges)};
  g.validate();
  return g;
}

// Sizes entering the quadratic-form variance bookkeeping, plus the growth
// ratios that indicate whether the chi-square regime applies at this N.
//
// For an edge e = (u, v), A_e is the set of edges sharing an endpoint with e
// (e itself included), and B_e the set of edges sharing an endpoint with some
// member of A_e. The asymptotic regime needs |G| and sum_t deg_t^2 - 4|G|^2/N
// of order N and sum_e |A_e||B_e| of smaller order than N^1.5.
struct GraphConditionStats {
  std::int64_t edge_count = 0;      // |G|
  std::int64_t sum_sq_degrees = 0;  // sum_t deg_t^2
  std::int64_t sum_ab = 0;          // sum_e |A_e| |B_e|
  double ratio_edges = 0.0;         // |G| / N
  double ratio_hub = 0.0;           // (sum_sq_degrees - 4|G|^2/N) / N
  double ratio_ab = 0.0;            // sum_ab / N^1.5
};

inline GraphConditionStats condition_stats(const SimilarityGraph& g) {
  g.validate();
  const int n = g.n;
  const std::vector<int> deg = g.degrees();

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) adj[static_cast<std::size_t>(t)].reserve(deg[static_cast<std::size_t>(t)]);
  for (const auto& [u, v] : g.edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }

  GraphConditionStats s;
  s.edge_count = g.edge_count();
  for (const int d : deg) s.sum_sq_degrees += static_cast<std::int64_t>(d) * d;

  // Nodes within distance 1 of the current edge are stamped with its index;
  // B_e then counts edges with a stamped endpoint, halving inside the
  // stamped set to avoid double counting.
  std::vector<int> stamp(static_cast<std::size_t>(n), -1);
  std::vector<int> stamped;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [u, v] = g.edges[e];
    const std::int64_t a_size = static_cast<std::int64_t>(deg[static_cast<std::size_t>(u)]) +
                                deg[static_cast<std::size_t>(v)] - 1;
    stamped.clear();
    const auto mark = [&](int x) {
      if (stamp[static_cast<std::size_t>(x)] != static_cast<int>(e)) {
        stamp[static_cast<std::size_t>(x)] = static_cast<int>(e);
        stamped.push_back(x);
      }
    };
    mark(u);
    mark(v);
    for (const int y : adj[static_cast<std::size_t>(u)]) mark(y);
    for (const int y : adj[static_cast<std::size_t>(v)]) mark(y);

    std::int64_t b_size = 0;
    for (const int x : stamped) {
      for (const int y : adj[static_cast<std::size_t>(x)]) {
        if (stamp[static_cast<std::size_t>(y)] != static_cast<int>(e)) {
          ++b_size;  // exactly one endpoint stamped
        } else if (x < y) {
          ++b_size;  // both stamped; count once
        }
      }
    }
    s.sum_ab += a_size * b_size;
  }

  const double nd = static_cast<double>(n);
  const double m = static_cast<double>(s.edge_count);
  s.ratio_edges = m / nd;
  s.ratio_hub = (static_cast<double>(s.sum_sq_degrees) - 4.0 * m * m / nd) / nd;
  s.ratio_ab = static_cast<double>(s.sum_ab) / std::pow(nd, 1.5);
  return s;
}

}  // namespace gkst
