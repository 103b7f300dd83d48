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

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gkst/chi_square.hpp"
#include "gkst/counts.hpp"
#include "gkst/errors.hpp"
#include "gkst/graph.hpp"
#include "gkst/moments.hpp"
#include "gkst/parallel.hpp"
#include "gkst/rng.hpp"
#include "gkst/stats.hpp"

namespace gkst {

enum class Method {
  SW_asym,
  SB_asym,
  SA_asym,
  SS_fast,
  perm_S,
  perm_SW,
  perm_SB,
  perm_SA,
};

inline std::string method_name(Method m) {
  switch (m) {
    case Method::SW_asym: return "SW_asym";
    case Method::SB_asym: return "SB_asym";
    case Method::SA_asym: return "SA_asym";
    case Method::SS_fast: return "SS_fast";
    case Method::perm_S: return "perm_S";
    case Method::perm_SW: return "perm_SW";
    case Method::perm_SB: return "perm_SB";
    case Method::perm_SA: return "perm_SA";
  }
  throw input_error("method_name: unknown method");
}

struct TestResult {
  Method method = Method::SW_asym;
  double statistic = 0.0;
  std::optional<int> dof;  // set iff the p-value is a chi-square tail
  double p_value = 1.0;
  std::optional<int> n_permutations;
  std::optional<std::uint64_t> seed;
  GraphConditionStats diagnostics;
  bool condition_warning = false;  // sum_e |A_e||B_e| at or above N^1.5
  bool used_pseudo_inverse = false;
  bool p_capped = false;                             // SS only: 2 * min(pW, pB) exceeded 1
  std::optional<double> p_within, p_between;         // SS only
  std::optional<std::pair<int, int>> component_dof;  // SS and S: (within, between)
  std::vector<std::string> warnings;
};

namespace detail {

struct TestSetup {
  std::vector<int> sizes;
  int K = 0;
  EdgeCounts counts;
  NullMoments moments;
  GraphConditionStats diag;
  std::vector<std::string> warnings;
};

// Shared front half of every test: label checks, counts, null moments
// (enumeration below N = 4), condition diagnostics, small-group warnings.
inline TestSetup prepare_test(const SimilarityGraph& g, const std::vector<int>& labels) {
  if (static_cast<int>(labels.size()) != g.n) {
    throw input_error("test: labels length must equal the node count");
  }
  TestSetup s;
  s.sizes = group_sizes_from_labels(labels);
  s.K = static_cast<int>(s.sizes.size());
  if (s.K < 2) throw input_error("test: need at least two groups");
  s.counts = count_edges(g, labels, s.K);
  s.moments = (g.n >= 4) ? null_moments(g, s.sizes) : exact_moments_bruteforce(g, s.sizes);
  s.diag = condition_stats(g);
  for (int i = 0; i < s.K; ++i) {
    if (s.sizes[static_cast<std::size_t>(i)] < 2) {
      s.warnings.push_back("group " + std::to_string(i) +
                           " has fewer than 2 observations; chi-square approximations are "
                           "unreliable, prefer a permutation test");
    }
  }
  return s;
}

inline bool condition_warning(const GraphConditionStats& d) { return d.ratio_ab >= 1.0; }

// Statistic evaluator reusable across permuted label vectors. The underlying
// quadratic forms are factorized once; the null moments depend only on group
// sizes, which permutation preserves.
inline std::function<double(const EdgeCounts&)> make_evaluator(StatKind kind,
                                                               const NullMoments& moments) {
  const int K = moments.groups;
  if (kind == StatKind::Ssum) {
    const auto w_idx = NullMoments::within_indices(K);
    const auto b_idx = NullMoments::between_indices(K);
    const auto qw = std::make_shared<QuadraticForm>(moments.mean_view(w_idx), moments.cov_view(w_idx));
    const auto qb = std::make_shared<QuadraticForm>(moments.mean_view(b_idx), moments.cov_view(b_idx));
    return [qw, qb, w_idx, b_idx](const EdgeCounts& c) {
      const Eigen::VectorXd full = full_count_vector(c);
      return (*qw)(view_vector(full, w_idx)) + (*qb)(view_vector(full, b_idx));
    };
  }
  const auto idx = (kind == StatKind::SW)   ? NullMoments::within_indices(K)
                   : (kind == StatKind::SB) ? NullMoments::between_indices(K)
                                            : NullMoments::all_but_last_indices(K);
  const auto qf = std::make_shared<QuadraticForm>(moments.mean_view(idx), moments.cov_view(idx));
  return [qf, idx](const EdgeCounts& c) { return (*qf)(view_vector(full_count_vector(c), idx)); };
}

}  // namespace detail

// Chi-square test for SW, SB, or SA. SW is referred to K degrees of freedom;
// SB and SA to the numerical rank of the covariance actually inverted. The
// sum statistic S has no chi-square calibration here; use permutation_test.
inline TestResult asymptotic_test(const SimilarityGraph& g, const std::vector<int>& labels,
                                  StatKind kind) {
  if (kind == StatKind::Ssum) {
    throw input_error("asymptotic_test: S has no chi-square calibration; use permutation_test");
  }
  auto setup = detail::prepare_test(g, labels);
  if (g.n < 4) {
    throw size_error("asymptotic_test: need N >= 4; use permutation_test");
  }

  StatValue sv;
  switch (kind) {
    case StatKind::SW: sv = stat_sw(setup.counts, setup.moments); break;
    case StatKind::SB: sv = stat_sb(setup.counts, setup.moments); break;
    default: sv = stat_sa(setup.counts, setup.moments); break;
  }

  TestResult r;
  r.method = (kind == StatKind::SW)   ? Method::SW_asym
             : (kind == StatKind::SB) ? Method::SB_asym
                                      : Method::SA_asym;
  r.statistic = sv.value;
  r.used_pseudo_inverse = sv.used_pseudo_inverse;
  r.warnings = std::move(setup.warnings);
  if (kind == StatKind::SW) {
    r.dof = setup.K;
    if (sv.dof < setup.K) {
      r.warnings.push_back("within covariance has rank " + std::to_string(sv.dof) +
                           " below K = " + std::to_string(setup.K) +
                           "; the K-dof reference is conservative");
    }
  } else {
    r.dof = sv.dof;
  }
  r.p_value = chi_square_sf(r.statistic, *r.dof);
  r.diagnostics = setup.diag;
  r.condition_warning = detail::condition_warning(setup.diag);
  return r;
}

// Bonferroni combination of the SW and SB chi-square tests:
// p = min(1, 2 * min(p_within, p_between)). Rejecting when p <= alpha is the
// union of the two tests at level alpha / 2.
inline TestResult ss_test(const SimilarityGraph& g, const std::vector<int>& labels) {
  auto setup = detail::prepare_test(g, labels);
  if (g.n < 4) {
    throw size_error("ss_test: need N >= 4; use permutation_test");
  }
  const StatValue w = stat_sw(setup.counts, setup.moments);
  const StatValue b = stat_sb(setup.counts, setup.moments);

  TestResult r;
  r.method = Method::SS_fast;
  r.statistic = w.value + b.value;
  r.p_within = chi_square_sf(w.value, setup.K);
  r.p_between = chi_square_sf(b.value, b.dof);
  const double doubled = 2.0 * std::min(*r.p_within, *r.p_between);
  r.p_capped = doubled > 1.0;
  r.p_value = std::min(1.0, doubled);
  r.component_dof = std::make_pair(setup.K, b.dof);
  r.used_pseudo_inverse = w.used_pseudo_inverse || b.used_pseudo_inverse;
  r.warnings = std::move(setup.warnings);
  if (w.dof < setup.K) {
    r.warnings.push_back("within covariance has rank " + std::to_string(w.dof) + " below K = " +
                         std::to_string(setup.K) + "; the K-dof reference is conservative");
  }
  r.diagnostics = setup.diag;
  r.condition_warning = detail::condition_warning(setup.diag);
  return r;
}

// Permutation test for any of the four statistics. The p-value is
// (1 + #{permuted >= observed}) / (n_perm + 1); ties count toward rejection,
// so the test is valid (super-uniform under the null) at any n_perm. Each
// permutation draws from substream_seed(seed, index), making the result
// independent of thread count.
inline TestResult permutation_test(const SimilarityGraph& g, const std::vector<int>& labels,
                                   StatKind kind, int n_perm, std::uint64_t seed,
                                   int n_threads = 1) {
  if (n_perm < 1) throw input_error("permutation_test: n_perm must be >= 1");
  auto setup = detail::prepare_test(g, labels);
  const auto eval = detail::make_evaluator(kind, setup.moments);
  const double observed = eval(setup.counts);

  std::vector<std::uint8_t> geq(static_cast<std::size_t>(n_perm), 0);
  parallel_for(static_cast<std::size_t>(n_perm), n_threads, [&](std::size_t b) {
    Rng rng(substream_seed(seed, b));
    std::vector<int> permuted = labels;
    rng.shuffle(permuted);
    const double s = eval(count_edges(g, permuted, setup.K));
    if (s >= observed) geq[b] = 1;
  });
  std::int64_t n_geq = 0;
  for (const auto f : geq) n_geq += f;

  TestResult r;
  switch (kind) {
    case StatKind::SW: r.method = Method::perm_SW; break;
    case StatKind::SB: r.method = Method::perm_SB; break;
    case StatKind::SA: r.method = Method::perm_SA; break;
    case StatKind::Ssum: r.method = Method::perm_S; break;
  }
  r.statistic = observed;
  r.p_value = static_cast<double>(1 + n_geq) / static_cast<double>(n_perm + 1);
  r.n_permutations = n_perm;
  r.seed = seed;
  r.warnings = std::move(setup.warnings);
  if (kind == StatKind::Ssum) {
    const StatValue w = stat_sw(setup.counts, setup.moments);
    const StatValue b = stat_sb(setup.counts, setup.moments);
    r.component_dof = std::make_pair(w.dof, b.dof);
    r.used_pseudo_inverse = w.used_pseudo_inverse || b.used_pseudo_inverse;
  } else {
    StatValue sv;
    switch (kind) {
      case StatKind::SW: sv = stat_sw(setup.counts, setup.moments); break;
      case StatKind::SB: sv = stat_sb(setup.counts, setup.moments); break;
      default: sv = stat_sa(setup.counts, setup.moments); break;
    }
    r.used_pseudo_inverse = sv.used_pseudo_inverse;
  }
  r.diagnostics = setup.diag;
  r.condition_warning = detail::condition_warning(setup.diag);
  return r;
}

}  // namespace gkst
