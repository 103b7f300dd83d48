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

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "gkst/errors.hpp"

namespace gkst {

// Runs body(i) for i in [0, n), split into contiguous blocks across
// n_threads. Callers make results thread-count independent by writing only
// to index-addressed slots (or accumulating integers reduced after the
// call); randomness must come from per-index substreams, never a shared
// engine. The first exception thrown by any block is rethrown here.
template <typename Body>
void parallel_for(std::size_t n, int n_threads, Body&& body) {
  if (n_threads < 1) throw input_error("parallel_for: n_threads must be >= 1");
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(n_threads), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    threads.emplace_back([&, lo, hi]() {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gkst
