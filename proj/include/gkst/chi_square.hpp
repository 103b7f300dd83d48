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

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gkst/errors.hpp"

namespace gkst {

namespace detail {

// Regularized lower incomplete gamma P(a, x) by its power series.
// Converges fast for x < a + 1.
inline double gamma_p_series(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int it = 0; it < 2000; ++it) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * eps) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw std::runtime_error("gamma_p_series: no convergence");
}

// Regularized upper incomplete gamma Q(a, x) by the Lentz continued
// fraction. Converges fast for x >= a + 1.
inline double gamma_q_contfrac(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double fpmin = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 2000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= eps) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw std::runtime_error("gamma_q_contfrac: no convergence");
}

}  // namespace detail

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
// Series and continued-fraction branches split at x = a + 1, where both
// converge quickly.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || std::isnan(x) || x < 0.0) {
    throw input_error("gamma_q: need a > 0 and x >= 0");
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_contfrac(a, x);
}

// Upper-tail probability P(X >= x) for X chi-square with dof degrees of
// freedom.
inline double chi_square_sf(double x, int dof) {
  if (dof < 1) throw input_error("chi_square_sf: dof must be >= 1");
  if (std::isnan(x) || x < 0.0) throw input_error("chi_square_sf: x must be >= 0");
  return gamma_q(0.5 * dof, 0.5 * x);
}

// Inverse CDF: the x with P(X <= x) = p. Bisection on the survival function;
// the CDF is strictly increasing, so plain bracketing suffices.
inline double chi_square_quantile(double p, int dof) {
  if (dof < 1) throw input_error("chi_square_quantile: dof must be >= 1");
  if (!(p >= 0.0) || !(p < 1.0)) {
    throw input_error("chi_square_quantile: p must lie in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  double hi = 1.0;
  while (1.0 - chi_square_sf(hi, dof) < p) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("chi_square_quantile: no bracket");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - chi_square_sf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-13 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace gkst
