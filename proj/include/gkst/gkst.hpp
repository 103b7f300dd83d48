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

// Umbrella header: graph-based K-sample tests of distributional equality.
//
// Pipeline: pairwise_distances -> build_kmst -> count_edges ->
// null_moments -> statistics (stat_sw / stat_sb / stat_sa / stat_s) ->
// asymptotic_test / ss_test / permutation_test. The simulation module
// generates the scenario families and estimates power.

#pragma once

#include "gkst/chi_square.hpp"
#include "gkst/counts.hpp"
#include "gkst/dataset.hpp"
#include "gkst/distance.hpp"
#include "gkst/errors.hpp"
#include "gkst/graph.hpp"
#include "gkst/inference.hpp"
#include "gkst/io.hpp"
#include "gkst/moments.hpp"
#include "gkst/parallel.hpp"
#include "gkst/rng.hpp"
#include "gkst/simulation.hpp"
#include "gkst/stats.hpp"
