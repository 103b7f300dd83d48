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

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "gkst/distance.hpp"
#include "gkst/graph.hpp"
#include "gkst/rng.hpp"
#include "oracles.hpp"

namespace {

gkst::Dataset random_points(int n, int d, std::uint64_t seed) {
  gkst::Dataset data;
  data.points.resize(n, d);
  gkst::Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.points(i, j) = rng.normal();
  }
  data.labels.assign(static_cast<std::size_t>(n), 0);
  return data;
}

double tree_weight(const std::vector<std::pair<int, int>>& edges, const gkst::DistanceMatrix& d) {
  double w = 0.0;
  for (const auto& [u, v] : edges) w += d(u, v);
  return w;
}

// Edges of the j-th tree (1-based): the union for k = j minus the union for
// k = j - 1. Valid because the first j - 1 trees of both runs coincide.
std::vector<std::pair<int, int>> tree_j(const gkst::DistanceMatrix& d, int j) {
  const auto upto = gkst::build_kmst(d, j).edges;
  std::set<std::pair<int, int>> prev;
  if (j > 1) {
    for (const auto& e : gkst::build_kmst(d, j - 1).edges) prev.insert(e);
  }
  std::vector<std::pair<int, int>> out;
  for (const auto& e : upto) {
    if (!prev.count(e)) out.push_back(e);
  }
  return out;
}

bool is_spanning_tree(int n, const std::vector<std::pair<int, int>>& edges) {
  if (static_cast<int>(edges.size()) != n - 1) return false;
  gkst::detail::UnionFind uf(n);
  for (const auto& [u, v] : edges) {
    if (!uf.unite(u, v)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("single MST on a line picks consecutive edges") {
  gkst::Dataset data;
  data.points.resize(4, 1);
  data.points << 0.0, 1.0, 3.0, 7.0;
  data.labels = {0, 0, 0, 0};
  const auto dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
  const auto g = gkst::build_kmst(dist, 1);
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
  CHECK(g.degrees() == std::vector<int>{1, 2, 2, 1});
}

TEST_CASE("first tree weight is minimal over all spanning trees") {
  // The reference minimum enumerates every labeled tree via Prufer codes.
  for (const std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto data = random_points(6, 3, seed);
    const auto dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
    const auto mst = gkst::build_kmst(dist, 1);
    REQUIRE(is_spanning_tree(6, mst.edges));
    double best = std::numeric_limits<double>::infinity();
    reference::for_each_spanning_tree(
        6, [&](const std::vector<std::pair<int, int>>& t) { best = std::min(best, tree_weight(t, dist)); });
    CHECK(tree_weight(mst.edges, dist) == Catch::Approx(best).margin(1e-12));
  }
}

TEST_CASE("later trees are minimal among trees avoiding earlier edges") {
  for (const std::uint64_t seed : {11u, 12u, 13u}) {
    const auto data = random_points(6, 2, seed);
    const auto dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
    const auto t1 = tree_j(dist, 1);
    const auto t2 = tree_j(dist, 2);
    REQUIRE(is_spanning_tree(6, t2));

    std::set<std::pair<int, int>> banned(t1.begin(), t1.end());
    double best = std::numeric_limits<double>::infinity();
    reference::for_each_spanning_tree(6, [&](const std::vector<std::pair<int, int>>& t) {
      for (const auto& e : t) {
        if (banned.count(e)) return;
      }
      best = std::min(best, tree_weight(t, dist));
    });
    CHECK(tree_weight(t2, dist) == Catch::Approx(best).margin(1e-12));
  }
}

TEST_CASE("k trees are edge-disjoint and each spans") {
  // n = 20 leaves room for 5 successive trees; small point clouds can
  // exhaust a hub node's incident edges sooner (see the failure test below).
  const auto data = random_points(20, 4, 77);
  const auto dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
  const int k = 5;
  const auto g = gkst::build_kmst(dist, k);
  CHECK(g.edge_count() == static_cast<std::int64_t>(k) * (20 - 1));
  std::set<std::pair<int, int>> seen(g.edges.begin(), g.edges.end());
  CHECK(seen.size() == g.edges.size());  // no duplicates across trees
  for (int j = 1; j <= k; ++j) {
    CHECK(is_spanning_tree(20, tree_j(dist, j)));
  }
}

TEST_CASE("requesting more trees than the complete graph holds fails cleanly") {
  const auto data = random_points(4, 2, 5);
  const auto dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
  CHECK_NOTHROW(gkst::build_kmst(dist, 2));  // 6 edges, 2 trees of 3
  CHECK_THROWS_AS(gkst::build_kmst(dist, 3), gkst::construction_error);
}

TEST_CASE("ties resolve deterministically by endpoint order") {
  // Four coincident points: all distances zero, so ordering falls back to
  // (smaller endpoint, larger endpoint) and the first tree is the star at 0.
  gkst::Dataset data;
  data.points = Eigen::MatrixXd::Zero(4, 2);
  data.labels = {0, 0, 0, 0};
  const auto dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
  const auto g = gkst::build_kmst(dist, 1);
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {0, 3}});
}

TEST_CASE("build_kmst validates arguments") {
  const auto data = random_points(5, 2, 6);
  const auto dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
  CHECK_THROWS_AS(gkst::build_kmst(dist, 0), gkst::input_error);
  gkst::Dataset one;
  one.points = Eigen::MatrixXd::Zero(1, 1);
  one.labels = {0};
  const auto d1 = gkst::pairwise_distances(one, gkst::Metric::euclidean);
  CHECK_THROWS_AS(gkst::build_kmst(d1, 1), gkst::input_error);
}

TEST_CASE("from_edges canonicalizes and validates") {
  const auto g = gkst::SimilarityGraph::from_edges(4, {{2, 0}, {3, 1}, {0, 1}});
  CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 3}});
  CHECK_THROWS_AS(gkst::SimilarityGraph::from_edges(3, {{0, 0}}), gkst::input_error);
  CHECK_THROWS_AS(gkst::SimilarityGraph::from_edges(3, {{0, 1}, {1, 0}}), gkst::input_error);
  CHECK_THROWS_AS(gkst::SimilarityGraph::from_edges(3, {{0, 5}}), gkst::input_error);
}

TEST_CASE("condition stats on hand-checked fixtures") {
  {
    // Single edge: the edge is its own neighborhood.
    const auto g = gkst::SimilarityGraph::from_edges(2, {{0, 1}});
    const auto s = gkst::condition_stats(g);
    CHECK(s.edge_count == 1);
    CHECK(s.sum_sq_degrees == 2);
    CHECK(s.sum_ab == 1);
  }
  {
    // Path on 3 nodes: each edge has |A_e| = 2 and |B_e| = 2.
    const auto g = gkst::SimilarityGraph::from_edges(3, {{0, 1}, {1, 2}});
    const auto s = gkst::condition_stats(g);
    CHECK(s.edge_count == 2);
    CHECK(s.sum_sq_degrees == 6);
    CHECK(s.sum_ab == 8);
  }
  {
    // Complete graph on 4 nodes: every |A_e| = 5, every |B_e| = 6.
    const auto g = gkst::SimilarityGraph::from_edges(
        4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    const auto s = gkst::condition_stats(g);
    CHECK(s.edge_count == 6);
    CHECK(s.sum_sq_degrees == 36);
    CHECK(s.sum_ab == 6 * 5 * 6);
    CHECK(s.ratio_hub == 0.0);  // regular graph: sum deg^2 == 4 m^2 / n
  }
}

TEST_CASE("condition stats invariants on random MST unions") {
  for (const std::uint64_t seed : {21u, 22u, 23u}) {
    const auto data = random_points(30, 3, seed);
    const auto dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
    const auto g = gkst::build_kmst(dist, 3);
    const auto s = gkst::condition_stats(g);
    CHECK(s.edge_count == 3 * 29);
    CHECK(s.ratio_hub >= 0.0);  // Cauchy-Schwarz on the degree sequence
    CHECK(s.ratio_edges == Catch::Approx(3.0 * 29 / 30));
    CHECK(s.sum_ab > 0);
    // Every |A_e| >= 1 and |B_e| >= |A_e| >= 1, so sum_ab >= m.
    CHECK(s.sum_ab >= s.edge_count);
  }
}
