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
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gkst/counts.hpp"
#include "gkst/errors.hpp"
#include "gkst/moments.hpp"

namespace gkst {

// The four test statistics. SW aggregates within-group counts, SB
// between-group counts, SA all counts (with one between-count dropped to
// remove the sum constraint), and Ssum = SW + SB.
enum class StatKind { SW, SB, SA, Ssum };

inline std::string stat_name(StatKind kind) {
  switch (kind) {
    case StatKind::SW: return "SW";
    case StatKind::SB: return "SB";
    case StatKind::SA: return "SA";
    case StatKind::Ssum: return "S";
  }
  throw input_error("stat_name: unknown statistic");
}

struct StatValue {
  StatKind kind = StatKind::SW;
  double value = 0.0;
  int dof = 0;  // rank of the covariance actually inverted
  bool used_pseudo_inverse = false;
};

namespace detail {

inline void check_symmetric(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw input_error("matrix: must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      if (std::fabs(a(i, j) - a(j, i)) > 1e-8 * scale) {
        throw input_error("matrix: not symmetric");
      }
    }
  }
}

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eigs(const Eigen::MatrixXd& a) {
  check_symmetric(a);
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) {
    throw degenerate_error("eigendecomposition failed");
  }
  return es;
}

inline double rank_tolerance(const Eigen::VectorXd& evals, Eigen::Index dim, double tol) {
  if (tol >= 0.0) return tol;
  const double max_abs = evals.cwiseAbs().maxCoeff();
  return static_cast<double>(dim) * std::numeric_limits<double>::epsilon() * max_abs;
}

}  // namespace detail

// Numerical rank of a symmetric matrix: the number of eigenvalues above
// tol. The default tol is dim * eps * max|eigenvalue|.
inline int matrix_rank(const Eigen::MatrixXd& sym, double tol = -1.0) {
  const auto es = detail::sym_eigs(sym);
  const double t = detail::rank_tolerance(es.eigenvalues(), sym.rows(), tol);
  int rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > t) ++rank;
  }
  return rank;
}

// Mahalanobis quadratic form (x - mean)' Sigma^+ (x - mean), factorized once
// so it can be applied to many count vectors. When Sigma has full numerical
// rank it is inverted through a Cholesky solve; otherwise the Moore-Penrose
// pseudo-inverse is formed from the eigendecomposition, inverting only
// eigenvalues above the rank tolerance.
class QuadraticForm {
 public:
  QuadraticForm(Eigen::VectorXd mean, const Eigen::MatrixXd& cov, double tol = -1.0)
      : mean_(std::move(mean)) {
    if (cov.rows() != cov.cols() || mean_.size() != cov.rows()) {
      throw input_error("QuadraticForm: mean and covariance shapes disagree");
    }
    const auto es = detail::sym_eigs(cov);
    const Eigen::VectorXd& evals = es.eigenvalues();
    const double t = detail::rank_tolerance(evals, cov.rows(), tol);
    rank_ = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
      if (evals(i) > t) ++rank_;
    }
    if (rank_ == 0) {
      throw degenerate_error("QuadraticForm: covariance has rank zero");
    }

    pseudo_ = (rank_ < static_cast<int>(cov.rows()));
    if (!pseudo_) {
      const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
      Eigen::LLT<Eigen::MatrixXd> llt(sym);
      if (llt.info() == Eigen::Success) {
        metric_ = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
        return;
      }
      pseudo_ = true;  // full numerical rank but a failed Cholesky pivot
    }
    metric_ = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
      if (evals(i) > t) {
        metric_.noalias() += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose() / evals(i);
      }
    }
  }

  // The form value; tiny negatives from roundoff are clipped to zero.
  double operator()(const Eigen::VectorXd& x) const {
    if (x.size() != mean_.size()) throw input_error("QuadraticForm: vector size mismatch");
    const Eigen::VectorXd d = x - mean_;
    const double v = d.dot(metric_ * d);
    return v < 0.0 ? 0.0 : v;
  }

  int rank() const { return rank_; }
  int dim() const { return static_cast<int>(mean_.size()); }
  bool used_pseudo_inverse() const { return pseudo_; }
  const Eigen::VectorXd& mean() const { return mean_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd metric_;
  int rank_ = 0;
  bool pseudo_ = false;
};

namespace detail {

inline StatValue stat_from_view(StatKind kind, const EdgeCounts& counts, const NullMoments& moments,
                                const std::vector<int>& idx) {
  if (counts.groups() != moments.groups) {
    throw input_error("statistic: counts and moments group counts disagree");
  }
  const QuadraticForm qf(moments.mean_view(idx), moments.cov_view(idx));
  const Eigen::VectorXd x = view_vector(full_count_vector(counts), idx);
  return StatValue{kind, qf(x), qf.rank(), qf.used_pseudo_inverse()};
}

}  // namespace detail

// Within-count statistic: quadratic form over R_11 .. R_KK.
inline StatValue stat_sw(const EdgeCounts& counts, const NullMoments& moments) {
  return detail::stat_from_view(StatKind::SW, counts, moments,
                                NullMoments::within_indices(moments.groups));
}

// Between-count statistic: quadratic form over the K(K-1)/2 between-counts.
inline StatValue stat_sb(const EdgeCounts& counts, const NullMoments& moments) {
  return detail::stat_from_view(StatKind::SB, counts, moments,
                                NullMoments::between_indices(moments.groups));
}

// All-count statistic: quadratic form over the full vector with one
// between-count dropped. The drop is arbitrary; see stat_sa_dropping.
inline StatValue stat_sa(const EdgeCounts& counts, const NullMoments& moments) {
  return detail::stat_from_view(StatKind::SA, counts, moments,
                                NullMoments::all_but_last_indices(moments.groups));
}

// SA variant dropping the count at `dropped_index` (a position in the full
// vector) instead of the last one. The value is invariant to which
// between-count is dropped.
inline StatValue stat_sa_dropping(const EdgeCounts& counts, const NullMoments& moments,
                                  int dropped_index) {
  const int p = NullMoments::dim(moments.groups);
  if (dropped_index < 0 || dropped_index >= p) {
    throw input_error("stat_sa_dropping: index out of range");
  }
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>(p) - 1);
  for (int s = 0; s < p; ++s) {
    if (s != dropped_index) idx.push_back(s);
  }
  return detail::stat_from_view(StatKind::SA, counts, moments, idx);
}

// Sum statistic S = SW + SB.
inline StatValue stat_s(const EdgeCounts& counts, const NullMoments& moments) {
  const StatValue w = stat_sw(counts, moments);
  const StatValue b = stat_sb(counts, moments);
  return StatValue{StatKind::Ssum, w.value + b.value, w.dof + b.dof,
                   w.used_pseudo_inverse || b.used_pseudo_inverse};
}

}  // namespace gkst
