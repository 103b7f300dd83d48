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

#include <stdexcept>
#include <string>

namespace gkst {

// Malformed caller input: bad labels, shape mismatches, out-of-range
// parameters. Maps to exit code 2 in the CLI.
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Problem size outside supported limits, e.g. an enumeration whose assignment
// count exceeds the guard, or closed-form moments requested for N < 4.
struct size_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Graph construction failure: a requested spanning tree cannot be completed.
struct construction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Statistically degenerate input, e.g. a null covariance of rank zero.
struct degenerate_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gkst
