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
#include <string>

#include "gkst/dataset.hpp"
#include "gkst/errors.hpp"

namespace gkst {

enum class Metric { euclidean, manhattan };

// Symmetric pairwise dissimilarities with a zero diagonal. Construction
// validates shape, finiteness, nonnegativity, symmetry, and the diagonal;
// whether the entries satisfy the triangle inequality is the caller's
// concern.
class DistanceMatrix {
 public:
  static DistanceMatrix from_matrix(Eigen::MatrixXd m) {
    if (m.rows() != m.cols()) throw input_error("distance matrix: must be square");
    if (m.rows() < 1) throw input_error("distance matrix: must be nonempty");
    if (!m.allFinite()) throw input_error("distance matrix: non-finite entry");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double tol = 1e-8 * scale;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (std::fabs(m(i, i)) > tol) {
        throw input_error("distance matrix: nonzero diagonal at row " + std::to_string(i));
      }
      m(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
        if (m(i, j) < -tol || m(j, i) < -tol) {
          throw input_error("distance matrix: negative entry");
        }
        if (std::fabs(m(i, j) - m(j, i)) > tol) {
          throw input_error("distance matrix: asymmetric at (" + std::to_string(i) + ", " +
                            std::to_string(j) + ")");
        }
        const double v = std::max(0.0, 0.5 * (m(i, j) + m(j, i)));
        m(i, j) = v;
        m(j, i) = v;
      }
    }
    return DistanceMatrix(std::move(m));
  }

  int size() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& entries() const { return m_; }

 private:
  explicit DistanceMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {}
  Eigen::MatrixXd m_;
};

// Pairwise distances between dataset rows. Coordinates are accumulated in a
// fixed order with scalar arithmetic, so results are bit-identical across
// platforms and thread counts; each pair is computed once and mirrored, so
// the result is exactly symmetric.
inline DistanceMatrix pairwise_distances(const Dataset& data, Metric metric) {
  data.validate();
  const int n = data.n();
  const int d = data.dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double acc = 0.0;
      if (metric == Metric::euclidean) {
        for (int t = 0; t < d; ++t) {
          const double diff = data.points(i, t) - data.points(j, t);
          acc += diff * diff;
        }
        acc = std::sqrt(acc);
      } else {
        for (int t = 0; t < d; ++t) {
          acc += std::fabs(data.points(i, t) - data.points(j, t));
        }
      }
      m(i, j) = acc;
      m(j, i) = acc;
    }
  }
  return DistanceMatrix::from_matrix(std::move(m));
}

}  // namespace gkst
