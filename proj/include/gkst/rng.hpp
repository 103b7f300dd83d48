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
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "gkst/errors.hpp"

namespace gkst {

// splitmix64 finalizer. Bijective on 64-bit integers, used to decorrelate
// seeds derived from small consecutive indices.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for the `index`-th substream of a master seed. Replicates and
// permutations each draw from their own substream, so results do not depend
// on how the index space is split across threads.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence the standard pins down exactly; the variate transforms are fixed
// here instead of delegating to std::<random> distributions, whose algorithms
// are implementation-defined:
//
//   uniform double  - 53-bit mantissa fill, values in [0, 1)
//   bounded integer - rejection sampling, no modulo bias
//   normal          - Marsaglia polar method, second deviate cached
//   gamma           - Marsaglia-Tsang squeeze for shape >= 1, with the
//                     Gamma(a) = Gamma(a+1) * U^(1/a) boost for shape < 1
//
// Two instances built from the same seed produce identical streams on every
// platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw input_error("uniform_below: n must be positive");
    const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= reject_below) return x % n;
    }
  }

  // Standard normal deviate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Gamma deviate with the given shape and unit scale.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw input_error("gamma: shape must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(uniform(), 1.0 / shape);
      return gamma_shape_ge1(shape + 1.0) * boost;
    }
    return gamma_shape_ge1(shape);
  }

  // Chi-square deviate with dof degrees of freedom.
  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  // Student t deviate with dof degrees of freedom.
  double student_t(double dof) {
    double w;
    do {
      w = chi_square(dof);
    } while (w <= 0.0);
    return normal() / std::sqrt(w / dof);
  }

  // Uniform random permutation in place (Fisher-Yates).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  double gamma_shape_ge1(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      // log(0) = -inf accepts, matching the u -> 0 limit of the exact test.
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gkst
