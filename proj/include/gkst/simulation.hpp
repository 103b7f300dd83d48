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
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gkst/dataset.hpp"
#include "gkst/distance.hpp"
#include "gkst/errors.hpp"
#include "gkst/graph.hpp"
#include "gkst/inference.hpp"
#include "gkst/parallel.hpp"
#include "gkst/rng.hpp"

namespace gkst {

// Simulation families. Group i (0-based here; schedules below use the
// 1-based index i+1) draws from the family's i-th distribution:
//
//   S1_location       N_d(mu (i-1) 1_d, I_d)
//   S2_scale          N_d(0, {1 + s (i-1)} I_d)
//   S3_covariance     N_d(0, Sigma_i), AR(1) Sigma_uv = rho_i^|u-v|,
//                     rho_i = 0.1 + s (i-1)
//   S4_kurtosis       iid t with df 2 + (i-1) s per coordinate, standardized
//   S5_skew_kurtosis  iid chi-square with df 1 + (i-1) s per coordinate,
//                     standardized
//   S6_lognormal      exp(N_d(s (i-1) 1_d, Sigma)) [location variant] or
//                     exp(N_d(0, {1 + s (i-1)} Sigma)) [scale variant],
//                     Sigma_uv = 0.4^|u-v|
//   S7_student_t      multivariate t_20 version of S6: t_20(s (i-1) 1_d,
//                     Sigma) or t_20(0, {1 + s (i-1)} Sigma)
//
// s is the `separation` field throughout; s = 0 collapses every family to
// its null (all groups identically distributed).
enum class Family {
  S1_location,
  S2_scale,
  S3_covariance,
  S4_kurtosis,
  S5_skew_kurtosis,
  S6_lognormal,
  S7_student_t,
};

inline std::string family_name(Family f) {
  switch (f) {
    case Family::S1_location: return "S1_location";
    case Family::S2_scale: return "S2_scale";
    case Family::S3_covariance: return "S3_covariance";
    case Family::S4_kurtosis: return "S4_kurtosis";
    case Family::S5_skew_kurtosis: return "S5_skew_kurtosis";
    case Family::S6_lognormal: return "S6_lognormal";
    case Family::S7_student_t: return "S7_student_t";
  }
  throw input_error("family_name: unknown family");
}

inline Family family_from_name(const std::string& name) {
  for (const Family f : {Family::S1_location, Family::S2_scale, Family::S3_covariance,
                         Family::S4_kurtosis, Family::S5_skew_kurtosis, Family::S6_lognormal,
                         Family::S7_student_t}) {
    const std::string full = family_name(f);
    if (name == full || name == full.substr(0, 2)) return f;  // "S1_location" or "S1"
  }
  throw input_error("unknown scenario family: " + name);
}

enum class Variant { location, scale };

struct ScenarioSpec {
  Family family = Family::S1_location;
  int groups = 3;
  int dim = 50;
  std::vector<int> group_sizes;  // empty means 50 per group
  double separation = 0.0;
  Variant variant = Variant::location;  // meaningful for S6/S7 only

  std::vector<int> sizes() const {
    if (group_sizes.empty()) return std::vector<int>(static_cast<std::size_t>(groups), 50);
    return group_sizes;
  }

  void validate() const {
    if (groups < 1) throw input_error("scenario: need at least one group");
    if (dim < 1) throw input_error("scenario: dimension must be >= 1");
    if (!group_sizes.empty() && static_cast<int>(group_sizes.size()) != groups) {
      throw input_error("scenario: group_sizes length must equal the group count");
    }
    for (const int n : sizes()) {
      if (n < 1) throw input_error("scenario: every group must be nonempty");
    }
    if (!std::isfinite(separation)) throw input_error("scenario: separation must be finite");
    if (variant == Variant::scale && family != Family::S6_lognormal &&
        family != Family::S7_student_t) {
      throw input_error("scenario: the scale variant applies to S6 and S7 only");
    }
    const double top = separation * (groups - 1);  // schedule value at the last group
    switch (family) {
      case Family::S1_location:
        break;
      case Family::S2_scale:
        if (1.0 + top <= 0.0) throw input_error("scenario: variance 1 + s(K-1) must be positive");
        break;
      case Family::S3_covariance:
        if (std::fabs(0.1 + top) >= 1.0) {
          throw input_error("scenario: AR coefficient 0.1 + s(K-1) must lie in (-1, 1)");
        }
        break;
      case Family::S4_kurtosis:
        if (separation < 0.0) throw input_error("scenario: t df schedule needs s >= 0");
        break;
      case Family::S5_skew_kurtosis:
        if (1.0 + top <= 0.0) throw input_error("scenario: chi-square df 1 + s(K-1) must be positive");
        break;
      case Family::S6_lognormal:
      case Family::S7_student_t:
        if (variant == Variant::scale && 1.0 + top <= 0.0) {
          throw input_error("scenario: scale factor 1 + s(K-1) must be positive");
        }
        break;
    }
  }
};

// AR(1) covariance Sigma_uv = rho^|u-v|.
inline Eigen::MatrixXd ar1_covariance(int d, double rho) {
  if (d < 1) throw input_error("ar1_covariance: d must be >= 1");
  if (!(std::fabs(rho) < 1.0)) throw input_error("ar1_covariance: |rho| must be < 1");
  Eigen::MatrixXd s(d, d);
  for (int u = 0; u < d; ++u) {
    for (int v = 0; v < d; ++v) {
      s(u, v) = std::pow(rho, std::abs(u - v));
    }
  }
  return s;
}

// Lower-triangular Cholesky factor L with L L^T = sym.
inline Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& sym) {
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw degenerate_error("cholesky_lower: matrix is not positive definite");
  }
  return llt.matrixL();
}

// One dataset draw. Groups are laid out in blocks (all of group 0, then
// group 1, ..); observations and coordinates are drawn in that fixed order
// from a single stream, so a (spec, seed) pair fully determines the result.
inline Dataset generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  const std::vector<int> sizes = spec.sizes();
  const int K = spec.groups;
  const int d = spec.dim;
  int total = 0;
  for (const int n : sizes) total += n;

  Dataset data;
  data.points.resize(total, d);
  data.labels.reserve(static_cast<std::size_t>(total));
  for (int grp = 0; grp < K; ++grp) {
    data.labels.insert(data.labels.end(), static_cast<std::size_t>(sizes[static_cast<std::size_t>(grp)]),
                       grp);
  }

  Rng rng(seed);
  const bool needs_ar1 = spec.family == Family::S3_covariance ||
                         spec.family == Family::S6_lognormal ||
                         spec.family == Family::S7_student_t;
  // Base factor for the families with a fixed AR(1) shape; S3 refactors per
  // group because its correlation itself moves with i.
  Eigen::MatrixXd base_l;
  if (needs_ar1 && spec.family != Family::S3_covariance) {
    base_l = cholesky_lower(ar1_covariance(d, 0.4));
  }

  Eigen::VectorXd z(d);
  int row = 0;
  for (int grp = 0; grp < K; ++grp) {
    const double step = spec.separation * grp;  // schedule offset for this group
    Eigen::MatrixXd l;
    if (spec.family == Family::S3_covariance) {
      l = cholesky_lower(ar1_covariance(d, 0.1 + step));
    } else if (needs_ar1) {
      const double scale =
          (spec.variant == Variant::scale) ? std::sqrt(1.0 + step) : 1.0;
      l = base_l * scale;
    }
    const double mean_shift =
        (needs_ar1 && spec.variant == Variant::location && spec.family != Family::S3_covariance)
            ? step
            : 0.0;

    for (int obs = 0; obs < sizes[static_cast<std::size_t>(grp)]; ++obs, ++row) {
      switch (spec.family) {
        case Family::S1_location: {
          for (int t = 0; t < d; ++t) data.points(row, t) = step + rng.normal();
          break;
        }
        case Family::S2_scale: {
          const double sd = std::sqrt(1.0 + step);
          for (int t = 0; t < d; ++t) data.points(row, t) = sd * rng.normal();
          break;
        }
        case Family::S3_covariance: {
          for (int t = 0; t < d; ++t) z(t) = rng.normal();
          data.points.row(row) = (l.triangularView<Eigen::Lower>() * z).transpose();
          break;
        }
        case Family::S4_kurtosis: {
          // t_df has variance df / (df - 2); the df = 2 boundary case has
          // none to normalize, so the draw is used as is.
          const double df = 2.0 + step;
          const double sd_inv = (df > 2.0) ? std::sqrt((df - 2.0) / df) : 1.0;
          for (int t = 0; t < d; ++t) data.points(row, t) = sd_inv * rng.student_t(df);
          break;
        }
        case Family::S5_skew_kurtosis: {
          const double df = 1.0 + step;  // chi-square mean df, variance 2 df
          const double sd_inv = 1.0 / std::sqrt(2.0 * df);
          for (int t = 0; t < d; ++t) {
            data.points(row, t) = (rng.chi_square(df) - df) * sd_inv;
          }
          break;
        }
        case Family::S6_lognormal: {
          for (int t = 0; t < d; ++t) z(t) = rng.normal();
          const Eigen::VectorXd y = l.triangularView<Eigen::Lower>() * z;
          for (int t = 0; t < d; ++t) data.points(row, t) = std::exp(mean_shift + y(t));
          break;
        }
        case Family::S7_student_t: {
          for (int t = 0; t < d; ++t) z(t) = rng.normal();
          double w;
          do {
            w = rng.chi_square(20.0);
          } while (w <= 0.0);
          const double t_scale = std::sqrt(20.0 / w);
          const Eigen::VectorXd y = l.triangularView<Eigen::Lower>() * z;
          for (int t = 0; t < d; ++t) data.points(row, t) = mean_shift + t_scale * y(t);
          break;
        }
      }
    }
  }
  data.validate();
  return data;
}

struct TestConfig {
  Method method = Method::SS_fast;
  int n_perm = 999;  // permutation methods only
};

struct PowerEntry {
  Method method = Method::SS_fast;
  int n_perm = 0;  // 0 for asymptotic methods
  int rejections = 0;
  double rejection_rate = 0.0;
  double mc_stderr = 0.0;  // binomial standard error of the rate
};

struct PowerReport {
  ScenarioSpec scenario;
  double alpha = 0.05;
  int replications = 0;
  int k_mst = 5;
  std::uint64_t seed = 0;
  std::vector<PowerEntry> tests;
};

// Rejection rate of each configured test over independent scenario
// replicates. Replicate r draws its data from substream_seed(seed, r) and
// runs every test on the same draw; replicates are parallelized, so inner
// permutation tests run single-threaded. Results do not depend on
// n_threads. Failures abort with the replicate index attached.
inline PowerReport estimate_power(const ScenarioSpec& spec, const std::vector<TestConfig>& tests,
                                  double alpha, int replications, std::uint64_t seed,
                                  int k_mst = 5, int n_threads = 1) {
  spec.validate();
  if (spec.groups < 2) throw input_error("estimate_power: need at least two groups");
  if (tests.empty()) throw input_error("estimate_power: no tests configured");
  if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("estimate_power: alpha must lie in (0, 1)");
  if (replications < 1) throw input_error("estimate_power: replications must be >= 1");
  for (const auto& t : tests) {
    const bool is_perm = t.method == Method::perm_S || t.method == Method::perm_SW ||
                         t.method == Method::perm_SB || t.method == Method::perm_SA;
    if (is_perm && t.n_perm < 1) throw input_error("estimate_power: n_perm must be >= 1");
  }

  const std::size_t n_tests = tests.size();
  std::vector<std::uint8_t> reject(n_tests * static_cast<std::size_t>(replications), 0);

  parallel_for(static_cast<std::size_t>(replications), n_threads, [&](std::size_t r) {
    try {
      const std::uint64_t rep_seed = substream_seed(seed, r);
      const Dataset data = generate_scenario(spec, rep_seed);
      const DistanceMatrix dist = pairwise_distances(data, Metric::euclidean);
      const SimilarityGraph g = build_kmst(dist, k_mst);
      for (std::size_t t = 0; t < n_tests; ++t) {
        TestResult res;
        switch (tests[t].method) {
          case Method::SW_asym: res = asymptotic_test(g, data.labels, StatKind::SW); break;
          case Method::SB_asym: res = asymptotic_test(g, data.labels, StatKind::SB); break;
          case Method::SA_asym: res = asymptotic_test(g, data.labels, StatKind::SA); break;
          case Method::SS_fast: res = ss_test(g, data.labels); break;
          case Method::perm_S:
            res = permutation_test(g, data.labels, StatKind::Ssum, tests[t].n_perm,
                                   substream_seed(rep_seed, t), 1);
            break;
          case Method::perm_SW:
            res = permutation_test(g, data.labels, StatKind::SW, tests[t].n_perm,
                                   substream_seed(rep_seed, t), 1);
            break;
          case Method::perm_SB:
            res = permutation_test(g, data.labels, StatKind::SB, tests[t].n_perm,
                                   substream_seed(rep_seed, t), 1);
            break;
          case Method::perm_SA:
            res = permutation_test(g, data.labels, StatKind::SA, tests[t].n_perm,
                                   substream_seed(rep_seed, t), 1);
            break;
        }
        if (res.p_value <= alpha) reject[t * static_cast<std::size_t>(replications) + r] = 1;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("estimate_power: replicate " + std::to_string(r) + ": " + e.what());
    }
  });

  PowerReport report;
  report.scenario = spec;
  report.alpha = alpha;
  report.replications = replications;
  report.k_mst = k_mst;
  report.seed = seed;
  for (std::size_t t = 0; t < n_tests; ++t) {
    PowerEntry entry;
    entry.method = tests[t].method;
    const bool is_perm = tests[t].method == Method::perm_S || tests[t].method == Method::perm_SW ||
                         tests[t].method == Method::perm_SB || tests[t].method == Method::perm_SA;
    entry.n_perm = is_perm ? tests[t].n_perm : 0;
    for (int r = 0; r < replications; ++r) {
      entry.rejections += reject[t * static_cast<std::size_t>(replications) + static_cast<std::size_t>(r)];
    }
    entry.rejection_rate = static_cast<double>(entry.rejections) / replications;
    entry.mc_stderr =
        std::sqrt(entry.rejection_rate * (1.0 - entry.rejection_rate) / replications);
    report.tests.push_back(entry);
  }
  return report;
}

}  // namespace gkst
