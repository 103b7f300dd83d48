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
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gkst/counts.hpp"
#include "gkst/errors.hpp"
#include "gkst/graph.hpp"

namespace gkst {

// Mean and covariance of the edge-count vector under the permutation null,
// which assigns group labels uniformly over all distinct arrangements with
// the observed group sizes.
//
// The count vector of dimension K(K+1)/2 is ordered within-counts first,
// R_11 .. R_KK, then between-counts row-major: R_12, R_13, .., R_1K, R_23, ..
struct NullMoments {
  int groups = 0;
  Eigen::VectorXd mean_full;
  Eigen::MatrixXd cov_full;

  static int dim(int K) { return K * (K + 1) / 2; }

  // Position of the (i, j) count, 0-based, i <= j.
  static int full_index(int i, int j, int K) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= K) throw input_error("full_index: pair out of range");
    if (i == j) return i;
    return K + i * K - i * (i + 1) / 2 + (j - i - 1);
  }

  // First K entries: the within-group counts.
  static std::vector<int> within_indices(int K) {
    std::vector<int> idx(static_cast<std::size_t>(K));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }

  // Remaining entries: the between-group counts.
  static std::vector<int> between_indices(int K) {
    std::vector<int> idx(static_cast<std::size_t>(dim(K) - K));
    std::iota(idx.begin(), idx.end(), K);
    return idx;
  }

  // All entries except the final between-count. The full vector sums to the
  // edge count, so its covariance is singular; dropping any one entry
  // removes that constraint.
  static std::vector<int> all_but_last_indices(int K) {
    std::vector<int> idx(static_cast<std::size_t>(dim(K) - 1));
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
  }

  Eigen::VectorXd mean_view(const std::vector<int>& idx) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t s = 0; s < idx.size(); ++s) out(static_cast<Eigen::Index>(s)) = mean_full(idx[s]);
    return out;
  }

  Eigen::MatrixXd cov_view(const std::vector<int>& idx) const {
    const auto sz = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd out(sz, sz);
    for (std::size_t s = 0; s < idx.size(); ++s) {
      for (std::size_t t = 0; t < idx.size(); ++t) {
        out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = cov_full(idx[s], idx[t]);
      }
    }
    return out;
  }
};

// Edge counts flattened to the NullMoments ordering.
inline Eigen::VectorXd full_count_vector(const EdgeCounts& counts) {
  const int K = counts.groups();
  Eigen::VectorXd v(NullMoments::dim(K));
  for (int i = 0; i < K; ++i) {
    for (int j = i; j < K; ++j) {
      v(NullMoments::full_index(i, j, K)) = static_cast<double>(counts.r(i, j));
    }
  }
  return v;
}

inline Eigen::VectorXd view_vector(const Eigen::VectorXd& full, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t s = 0; s < idx.size(); ++s) out(static_cast<Eigen::Index>(s)) = full(idx[s]);
  return out;
}

namespace detail {

inline void check_group_sizes(const SimilarityGraph& g, const std::vector<int>& sizes) {
  if (sizes.empty()) throw input_error("group sizes: must be nonempty");
  std::int64_t total = 0;
  for (const int s : sizes) {
    if (s < 1) throw input_error("group sizes: every group must be nonempty");
    total += s;
  }
  if (total != g.n) throw input_error("group sizes: must sum to the node count");
}

}  // namespace detail

// Exact first and second permutation-null moments in closed form.
//
// With m = |G|, D2 = sum_t deg_t^2, the number of ordered pairs of distinct
// edges sharing an endpoint is c0 = D2 - 2m, and of ordered pairs sharing
// none is c1 = m^2 - D2 + m. Each moment is a weighted sum of falling
// factorial ratios of group sizes over N, one ratio term (m, c0, c1) per
// edge-pair class. Requires N >= 4 since four distinct nodes enter the c1
// terms; smaller problems are served exactly by exact_moments_bruteforce.
inline NullMoments null_moments(const SimilarityGraph& g, const std::vector<int>& group_sizes) {
  g.validate();
  detail::check_group_sizes(g, group_sizes);
  if (g.n < 4) {
    throw size_error("null_moments: closed forms need N >= 4; use exact_moments_bruteforce");
  }

  const int K = static_cast<int>(group_sizes.size());
  const int p = NullMoments::dim(K);
  const double N = static_cast<double>(g.n);
  const double m = static_cast<double>(g.edge_count());

  double d2 = 0.0;
  for (const int d : g.degrees()) d2 += static_cast<double>(d) * d;
  const double c0 = d2 - 2.0 * m;
  const double c1 = m * m - d2 + m;

  // Product over s of nums[s] / (N - s). Keeping numerators and denominators
  // paired avoids overflow and keeps each factor near 1.
  const auto chain = [N](std::initializer_list<double> nums) {
    double r = 1.0;
    double den = N;
    for (const double x : nums) {
      r *= x / den;
      den -= 1.0;
    }
    return r;
  };
  const auto sz = [&group_sizes](int i) { return static_cast<double>(group_sizes[static_cast<std::size_t>(i)]); };

  NullMoments out;
  out.groups = K;
  out.mean_full.resize(p);
  out.cov_full.resize(p, p);

  for (int i = 0; i < K; ++i) {
    out.mean_full(NullMoments::full_index(i, i, K)) = m * chain({sz(i), sz(i) - 1});
    for (int j = i + 1; j < K; ++j) {
      out.mean_full(NullMoments::full_index(i, j, K)) = 2.0 * m * chain({sz(i), sz(j)});
    }
  }

  // Covariance of the (i, j) and (k, l) counts, i <= j and k <= l. Cases
  // follow the overlap pattern of the two index pairs.
  const auto cov_entry = [&](int i, int j, int k, int l) -> double {
    if (i < j && k == l) {  // covariance is symmetric; put the within pair first
      std::swap(i, k);
      std::swap(j, l);
    }
    const double e1 = out.mean_full(NullMoments::full_index(i, j, K));
    const double e2 = out.mean_full(NullMoments::full_index(k, l, K));
    if (i == j && k == l) {
      if (i == k) {
        const double ni = sz(i);
        return m * chain({ni, ni - 1}) + c0 * chain({ni, ni - 1, ni - 2}) +
               c1 * chain({ni, ni - 1, ni - 2, ni - 3}) - e1 * e2;
      }
      return c1 * chain({sz(i), sz(i) - 1, sz(k), sz(k) - 1}) - e1 * e2;
    }
    if (i == j) {  // within (i,i) against between (k,l)
      const double ni = sz(i);
      if (i == k || i == l) {
        const double nj = sz(i == k ? l : k);
        return c0 * chain({ni, ni - 1, nj}) + 2.0 * c1 * chain({ni, ni - 1, ni - 2, nj}) - e1 * e2;
      }
      return 2.0 * c1 * chain({ni, ni - 1, sz(k), sz(l)}) - e1 * e2;
    }
    // two between-counts
    if (i == k && j == l) {
      const double ni = sz(i), nj = sz(j);
      return 2.0 * m * chain({ni, nj}) + c0 * chain({ni, nj, ni + nj - 2.0}) +
             4.0 * c1 * chain({ni, nj, ni - 1, nj - 1}) - e1 * e2;
    }
    int shared = -1;
    if (i == k || i == l) shared = i;
    if (j == k || j == l) shared = j;
    if (shared >= 0) {
      const int a = (i == shared) ? j : i;
      const int b = (k == shared) ? l : k;
      const double ns = sz(shared);
      return c0 * chain({ns, sz(a), sz(b)}) + 4.0 * c1 * chain({ns, ns - 1, sz(a), sz(b)}) - e1 * e2;
    }
    return 4.0 * c1 * chain({sz(i), sz(j), sz(k), sz(l)}) - e1 * e2;
  };

  for (int i = 0; i < K; ++i) {
    for (int j = i; j < K; ++j) {
      const int s = NullMoments::full_index(i, j, K);
      for (int k = 0; k < K; ++k) {
        for (int l = k; l < K; ++l) {
          const int t = NullMoments::full_index(k, l, K);
          if (t < s) continue;
          const double c = cov_entry(i, j, k, l);
          out.cov_full(s, t) = c;
          out.cov_full(t, s) = c;
        }
      }
    }
  }
  return out;
}

// Exact moments by enumerating every distinct label arrangement. Serves as
// the reference implementation for null_moments and as the N < 4 fallback.
// Guarded: the arrangement count N! / (n_1! .. n_K!) must not exceed 1e6.
inline NullMoments exact_moments_bruteforce(const SimilarityGraph& g,
                                            const std::vector<int>& group_sizes) {
  g.validate();
  detail::check_group_sizes(g, group_sizes);
  const int K = static_cast<int>(group_sizes.size());
  const int N = g.n;
  const int p = NullMoments::dim(K);

  double arrangements = 1.0;
  {
    int remaining = N;
    for (const int nk : group_sizes) {
      // multiply by C(remaining, nk)
      for (int s = 1; s <= nk; ++s) {
        arrangements *= static_cast<double>(remaining - nk + s) / static_cast<double>(s);
      }
      remaining -= nk;
      if (arrangements > 1.5e6) break;
    }
  }
  if (arrangements > 1e6 + 0.5) {
    throw size_error("exact_moments_bruteforce: arrangement count exceeds 1e6");
  }

  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(N));
  for (int grp = 0; grp < K; ++grp) {
    labels.insert(labels.end(), static_cast<std::size_t>(group_sizes[static_cast<std::size_t>(grp)]), grp);
  }

  std::vector<std::int64_t> sum(static_cast<std::size_t>(p), 0);
  std::vector<std::int64_t> sumsq(static_cast<std::size_t>(p) * p, 0);
  std::vector<std::int64_t> v(static_cast<std::size_t>(p), 0);
  std::int64_t count = 0;
  do {
    std::fill(v.begin(), v.end(), 0);
    for (const auto& [u, w] : g.edges) {
      const int a = labels[static_cast<std::size_t>(u)];
      const int b = labels[static_cast<std::size_t>(w)];
      ++v[static_cast<std::size_t>(NullMoments::full_index(a, b, K))];
    }
    for (int s = 0; s < p; ++s) {
      sum[static_cast<std::size_t>(s)] += v[static_cast<std::size_t>(s)];
      for (int t = s; t < p; ++t) {
        sumsq[static_cast<std::size_t>(s) * p + t] += v[static_cast<std::size_t>(s)] * v[static_cast<std::size_t>(t)];
      }
    }
    ++count;
  } while (std::next_permutation(labels.begin(), labels.end()));

  NullMoments out;
  out.groups = K;
  out.mean_full.resize(p);
  out.cov_full.resize(p, p);
  const double A = static_cast<double>(count);
  for (int s = 0; s < p; ++s) {
    out.mean_full(s) = static_cast<double>(sum[static_cast<std::size_t>(s)]) / A;
  }
  for (int s = 0; s < p; ++s) {
    for (int t = s; t < p; ++t) {
      const double c = static_cast<double>(sumsq[static_cast<std::size_t>(s) * p + t]) / A -
                       out.mean_full(s) * out.mean_full(t);
      out.cov_full(s, t) = c;
      out.cov_full(t, s) = c;
    }
  }
  return out;
}

// Per-count z-scores (observed - null mean) / null sd, shaped K x K to match
// EdgeCounts. Entries whose null variance vanishes are NaN: with a
// degenerate count there is nothing to standardize.
inline Eigen::MatrixXd standardized_counts(const EdgeCounts& counts, const NullMoments& moments) {
  const int K = counts.groups();
  if (K != moments.groups) {
    throw input_error("standardized_counts: group count mismatch");
  }
  double max_var = 0.0;
  for (int s = 0; s < moments.cov_full.rows(); ++s) {
    max_var = std::max(max_var, moments.cov_full(s, s));
  }
  const double tol = std::max(1e-12, 1e-10 * max_var);
  Eigen::MatrixXd z(K, K);
  for (int i = 0; i < K; ++i) {
    for (int j = i; j < K; ++j) {
      const int s = NullMoments::full_index(i, j, K);
      const double var = moments.cov_full(s, s);
      double zij = std::numeric_limits<double>::quiet_NaN();
      if (var > tol) {
        zij = (static_cast<double>(counts.r(i, j)) - moments.mean_full(s)) / std::sqrt(var);
      }
      z(i, j) = zij;
      z(j, i) = zij;
    }
  }
  return z;
}

}  // namespace gkst
