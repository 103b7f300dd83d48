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

// gkst: graph-based K-sample tests of distributional equality.
//
// Subcommands:
//   test   run the selected tests on a dataset (feature CSV or distances)
//   power  rejection rates over simulated scenario replicates
//   qq     null quantile pairs against the chi-square reference
//   diag   graph and covariance diagnostics for a dataset
//
// Exit codes: 0 success (regardless of the test decision), 2 input error,
// 3 numerical or degeneracy error.
//
// Determinism: every output is byte-identical across repeated runs and
// across --threads settings for a fixed seed. The i-th configured result in
// `test` draws its permutations from substream_seed(--seed, i).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gkst/gkst.hpp"

namespace {

using ordered_json = nlohmann::ordered_json;

// Shortest decimal string that round-trips the double; keeps CSV output
// byte-deterministic without dragging 17 digits through every field.
std::string dtos(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw gkst::input_error("cannot open output file: " + out_path);
  out << content;
}

// ---------------------------------------------------------------------------
// Option bundles shared across subcommands.

struct InputOpts {
  std::string features;   // feature CSV path
  std::string label_col = "label";
  std::string distances;  // square distance CSV path
  std::string labels;     // one-label-per-line file paired with --distances
};

struct CommonOpts {
  int k = 5;
  std::string metric = "euclidean";
  bool metric_set = false;  // whether --metric appeared on the command line
  std::vector<std::string> stats;
  std::string mode = "asym";
  double alpha = 0.05;
  int perms = 1000;
  std::uint64_t seed = 0;
  std::string out;
  std::string format;  // empty means the subcommand default
  int threads = 1;
};

struct ScenarioOpts {
  std::string family;
  int groups = 3;
  int dim = 50;
  std::vector<int> sizes;
  std::vector<double> separations;
  std::string variant = "location";
  std::string file;  // JSON spec, alternative to the flags above
};

struct LoadedInput {
  gkst::DistanceMatrix dist;
  std::vector<int> labels;
  std::vector<std::string> label_names;
  std::string kind;  // "features" or "distances"
  std::string path;
  std::optional<int> dim;  // feature input only
};

LoadedInput load_input(const InputOpts& in, const CommonOpts& common) {
  const bool has_features = !in.features.empty();
  const bool has_distances = !in.distances.empty();
  if (has_features == has_distances) {
    throw gkst::input_error(
        "provide exactly one input: --input features.csv or --distances matrix.csv");
  }
  if (has_features) {
    if (common.metric == "precomputed") {
      throw gkst::input_error("--metric precomputed requires --distances, not --input");
    }
    const gkst::LoadedDataset loaded = gkst::read_feature_csv(in.features, in.label_col);
    const gkst::Metric metric =
        common.metric == "manhattan" ? gkst::Metric::manhattan : gkst::Metric::euclidean;
    return LoadedInput{gkst::pairwise_distances(loaded.data, metric), loaded.data.labels,
                       loaded.label_names, "features", in.features, loaded.data.dim()};
  }
  if (common.metric_set && common.metric != "precomputed") {
    throw gkst::input_error("--distances implies --metric precomputed");
  }
  if (in.labels.empty()) throw gkst::input_error("--distances requires --labels");
  gkst::DistanceMatrix dist =
      gkst::DistanceMatrix::from_matrix(gkst::read_distance_csv(in.distances));
  const auto raw = gkst::read_label_lines(in.labels);
  if (static_cast<int>(raw.size()) != dist.size()) {
    throw gkst::input_error("--labels has " + std::to_string(raw.size()) +
                            " lines but the distance matrix has " +
                            std::to_string(dist.size()) + " rows");
  }
  auto [ids, names] = gkst::index_labels(raw);
  return LoadedInput{std::move(dist), std::move(ids), std::move(names), "distances",
                     in.distances, std::nullopt};
}

// ---------------------------------------------------------------------------
// Statistic selection.
//
// Mapping from --stat / --mode to concrete test methods:
//   SW, SB, SA  chi-square and/or permutation forms per --mode
//   S           permutation only (no chi-square calibration)
//   SS          asymptotic only (a Bonferroni combination of chi-square tests)
// With no --stat, the default suite is SS and SA asymptotic, plus the
// permutation S test when --mode includes permutations.

std::vector<gkst::Method> plan_methods(const std::vector<std::string>& stats,
                                       const std::string& mode) {
  const bool asym = mode == "asym" || mode == "both";
  const bool perm = mode == "perm" || mode == "both";
  std::vector<gkst::Method> out;
  const auto add = [&out](gkst::Method m) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  };

  if (stats.empty()) {
    if (asym) {
      add(gkst::Method::SS_fast);
      add(gkst::Method::SA_asym);
    }
    if (perm) add(gkst::Method::perm_S);
    return out;
  }
  for (const std::string& s : stats) {
    if (s == "SW") {
      if (asym) add(gkst::Method::SW_asym);
      if (perm) add(gkst::Method::perm_SW);
    } else if (s == "SB") {
      if (asym) add(gkst::Method::SB_asym);
      if (perm) add(gkst::Method::perm_SB);
    } else if (s == "SA") {
      if (asym) add(gkst::Method::SA_asym);
      if (perm) add(gkst::Method::perm_SA);
    } else if (s == "S") {
      if (mode == "asym") {
        throw gkst::input_error(
            "statistic S has no chi-square calibration; use --mode perm or --mode both");
      }
      add(gkst::Method::perm_S);
    } else if (s == "SS") {
      if (mode == "perm") {
        throw gkst::input_error(
            "SS is a Bonferroni combination of chi-square tests with no permutation form; "
            "permute S instead");
      }
      add(gkst::Method::SS_fast);
    } else {
      throw gkst::input_error("unknown statistic: " + s + " (choose from SW, SB, SA, S, SS)");
    }
  }
  return out;
}

bool is_permutation(gkst::Method m) {
  return m == gkst::Method::perm_S || m == gkst::Method::perm_SW ||
         m == gkst::Method::perm_SB || m == gkst::Method::perm_SA;
}

gkst::TestResult run_method(gkst::Method m, const gkst::SimilarityGraph& g,
                            const std::vector<int>& labels, int n_perm, std::uint64_t seed,
                            int threads) {
  switch (m) {
    case gkst::Method::SW_asym: return gkst::asymptotic_test(g, labels, gkst::StatKind::SW);
    case gkst::Method::SB_asym: return gkst::asymptotic_test(g, labels, gkst::StatKind::SB);
    case gkst::Method::SA_asym: return gkst::asymptotic_test(g, labels, gkst::StatKind::SA);
    case gkst::Method::SS_fast: return gkst::ss_test(g, labels);
    case gkst::Method::perm_S:
      return gkst::permutation_test(g, labels, gkst::StatKind::Ssum, n_perm, seed, threads);
    case gkst::Method::perm_SW:
      return gkst::permutation_test(g, labels, gkst::StatKind::SW, n_perm, seed, threads);
    case gkst::Method::perm_SB:
      return gkst::permutation_test(g, labels, gkst::StatKind::SB, n_perm, seed, threads);
    case gkst::Method::perm_SA:
      return gkst::permutation_test(g, labels, gkst::StatKind::SA, n_perm, seed, threads);
  }
  throw gkst::input_error("unknown method");
}

// ---------------------------------------------------------------------------
// Serialization. Documents carry a fixed key set; absent values are null.

ordered_json graph_to_json(int k, int nodes, const gkst::GraphConditionStats& d) {
  ordered_json j;
  j["k"] = k;
  j["nodes"] = nodes;
  j["edge_count"] = d.edge_count;
  j["sum_sq_degrees"] = d.sum_sq_degrees;
  j["sum_ab"] = d.sum_ab;
  j["ratio_edges"] = d.ratio_edges;
  j["ratio_hub"] = d.ratio_hub;
  j["ratio_ab"] = d.ratio_ab;
  j["condition_warning"] = d.ratio_ab >= 1.0;
  return j;
}

ordered_json groups_to_json(const std::vector<int>& sizes,
                            const std::vector<std::string>& label_names) {
  ordered_json j;
  j["count"] = static_cast<int>(sizes.size());
  j["sizes"] = sizes;
  j["label_names"] = label_names;  // group i carries label_names[i]
  return j;
}

ordered_json result_to_json(const gkst::TestResult& r, double alpha) {
  ordered_json j;
  j["method"] = gkst::method_name(r.method);
  j["statistic"] = r.statistic;
  j["dof"] = r.dof ? ordered_json(*r.dof) : ordered_json(nullptr);
  j["p_value"] = r.p_value;
  j["decision"] = r.p_value <= alpha ? "reject" : "fail_to_reject";
  j["n_permutations"] = r.n_permutations ? ordered_json(*r.n_permutations) : ordered_json(nullptr);
  j["seed"] = r.seed ? ordered_json(*r.seed) : ordered_json(nullptr);
  j["p_within"] = r.p_within ? ordered_json(*r.p_within) : ordered_json(nullptr);
  j["p_between"] = r.p_between ? ordered_json(*r.p_between) : ordered_json(nullptr);
  j["p_capped"] = r.p_capped;
  j["component_dof"] = r.component_dof
                           ? ordered_json({r.component_dof->first, r.component_dof->second})
                           : ordered_json(nullptr);
  j["used_pseudo_inverse"] = r.used_pseudo_inverse;
  j["condition_warning"] = r.condition_warning;
  j["warnings"] = r.warnings;
  return j;
}

std::string results_to_csv(const std::vector<gkst::TestResult>& results, double alpha) {
  std::string out =
      "method,statistic,dof,p_value,decision,n_permutations,seed,p_within,p_between,"
      "p_capped,dof_within,dof_between,used_pseudo_inverse,condition_warning\n";
  for (const auto& r : results) {
    out += gkst::method_name(r.method) + ',' + dtos(r.statistic) + ',';
    out += r.dof ? std::to_string(*r.dof) : std::string();
    out += ',' + dtos(r.p_value) + ',';
    out += r.p_value <= alpha ? "reject" : "fail_to_reject";
    out += ',';
    out += r.n_permutations ? std::to_string(*r.n_permutations) : std::string();
    out += ',';
    out += r.seed ? std::to_string(*r.seed) : std::string();
    out += ',';
    out += r.p_within ? dtos(*r.p_within) : std::string();
    out += ',';
    out += r.p_between ? dtos(*r.p_between) : std::string();
    out += ',';
    out += r.p_capped ? '1' : '0';
    out += ',';
    out += r.component_dof ? std::to_string(r.component_dof->first) : std::string();
    out += ',';
    out += r.component_dof ? std::to_string(r.component_dof->second) : std::string();
    out += ',';
    out += r.used_pseudo_inverse ? '1' : '0';
    out += ',';
    out += r.condition_warning ? '1' : '0';
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenario specification: flags or a JSON file.
//
// JSON schema: {"family": "S1_location", "groups": 3, "dim": 50,
//               "group_sizes": [50,50,50], "separation": 0.14,
//               "separations": [0,0.07,0.14], "variant": "location"}
// family is required; the rest default as the flags do. `separations`
// (a sweep) is accepted by `power` only.

gkst::Variant variant_from_name(const std::string& name) {
  if (name == "location") return gkst::Variant::location;
  if (name == "scale") return gkst::Variant::scale;
  throw gkst::input_error("unknown variant: " + name + " (location or scale)");
}

struct ScenarioPlan {
  gkst::ScenarioSpec spec;               // separation filled per grid point
  std::vector<double> separations{0.0};  // sweep grid
};

ScenarioPlan scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gkst::input_error("cannot open scenario file: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw gkst::input_error(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw gkst::input_error(path + ": scenario must be a JSON object");

  ScenarioPlan plan;
  bool has_family = false;
  bool has_separation = false;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "family") {
        plan.spec.family = gkst::family_from_name(value.get<std::string>());
        has_family = true;
      } else if (key == "groups") {
        plan.spec.groups = value.get<int>();
      } else if (key == "dim") {
        plan.spec.dim = value.get<int>();
      } else if (key == "group_sizes") {
        plan.spec.group_sizes = value.get<std::vector<int>>();
      } else if (key == "separation") {
        plan.separations = {value.get<double>()};
        has_separation = true;
      } else if (key == "separations") {
        plan.separations = value.get<std::vector<double>>();
        if (plan.separations.empty()) {
          throw gkst::input_error("separations must not be empty");
        }
        has_separation = true;
      } else if (key == "variant") {
        plan.spec.variant = variant_from_name(value.get<std::string>());
      } else {
        throw gkst::input_error("unknown key '" + key + "'");
      }
    } catch (const gkst::input_error&) {
      throw;
    } catch (const std::exception& e) {
      throw gkst::input_error(path + ": key '" + key + "': " + e.what());
    }
  }
  if (!has_family) throw gkst::input_error(path + ": scenario needs a 'family'");
  (void)has_separation;  // absent separation means the null, 0.0
  return plan;
}

ScenarioPlan scenario_from_opts(const ScenarioOpts& s) {
  if (!s.file.empty()) {
    if (!s.family.empty() || !s.separations.empty() || !s.sizes.empty()) {
      throw gkst::input_error("give scenario flags or --scenario-file, not both");
    }
    ScenarioPlan plan = scenario_from_file(s.file);
    plan.spec.validate();
    return plan;
  }
  if (s.family.empty()) {
    throw gkst::input_error("scenario needs --family (S1..S7) or --scenario-file");
  }
  ScenarioPlan plan;
  plan.spec.family = gkst::family_from_name(s.family);
  plan.spec.groups = s.groups;
  plan.spec.dim = s.dim;
  plan.spec.group_sizes = s.sizes;
  plan.spec.variant = variant_from_name(s.variant);
  if (!s.separations.empty()) plan.separations = s.separations;
  plan.spec.validate();
  return plan;
}

// Validate every grid point up front so a sweep fails before any work runs.
void validate_grid(const ScenarioPlan& plan) {
  for (const double sep : plan.separations) {
    gkst::ScenarioSpec spec = plan.spec;
    spec.separation = sep;
    spec.validate();
  }
}

// ---------------------------------------------------------------------------
// test

int cmd_test(const InputOpts& in, const CommonOpts& common) {
  const LoadedInput input = load_input(in, common);
  const std::vector<gkst::Method> plan = plan_methods(common.stats, common.mode);
  if (!(common.alpha > 0.0 && common.alpha < 1.0)) {
    throw gkst::input_error("--alpha must lie in (0, 1)");
  }

  const gkst::SimilarityGraph g = gkst::build_kmst(input.dist, common.k);
  const std::vector<int> sizes = gkst::group_sizes_from_labels(input.labels);
  if (sizes.size() < 2) throw gkst::input_error("need at least two groups");

  std::vector<gkst::TestResult> results;
  results.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const std::uint64_t method_seed = gkst::substream_seed(common.seed, i);
    results.push_back(
        run_method(plan[i], g, input.labels, common.perms, method_seed, common.threads));
  }
  for (const auto& r : results) {
    for (const auto& w : r.warnings) {
      std::cerr << "warning: " << gkst::method_name(r.method) << ": " << w << "\n";
    }
  }

  const std::string format = common.format.empty() ? "json" : common.format;
  if (format == "csv") {
    write_output(common.out, results_to_csv(results, common.alpha));
    return 0;
  }
  ordered_json doc;
  doc["schema"] = "gkst.test_result/1";
  doc["command"] = "test";
  ordered_json input_j;
  input_j["kind"] = input.kind;
  input_j["path"] = input.path;
  input_j["n"] = static_cast<int>(input.labels.size());
  input_j["dim"] = input.dim ? ordered_json(*input.dim) : ordered_json(nullptr);
  input_j["metric"] = input.kind == "distances" ? "precomputed" : common.metric;
  doc["input"] = input_j;
  doc["alpha"] = common.alpha;
  doc["seed"] = common.seed;
  doc["groups"] = groups_to_json(sizes, input.label_names);
  doc["graph"] = graph_to_json(common.k, g.n, gkst::condition_stats(g));
  doc["results"] = ordered_json::array();
  for (const auto& r : results) doc["results"].push_back(result_to_json(r, common.alpha));
  write_output(common.out, doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// power

int cmd_power(const ScenarioOpts& scenario, const CommonOpts& common, int reps) {
  const ScenarioPlan plan = scenario_from_opts(scenario);
  validate_grid(plan);
  const std::vector<gkst::Method> methods = plan_methods(common.stats, common.mode);
  std::vector<gkst::TestConfig> tests;
  tests.reserve(methods.size());
  for (const gkst::Method m : methods) {
    tests.push_back({m, is_permutation(m) ? common.perms : 0});
  }

  std::vector<gkst::PowerReport> reports;
  reports.reserve(plan.separations.size());
  for (const double sep : plan.separations) {
    gkst::ScenarioSpec spec = plan.spec;
    spec.separation = sep;
    reports.push_back(gkst::estimate_power(spec, tests, common.alpha, reps, common.seed,
                                           common.k, common.threads));
  }

  const std::string format = common.format.empty() ? "csv" : common.format;
  const auto sizes_of = [](const gkst::ScenarioSpec& s) { return s.sizes(); };
  if (format == "csv") {
    std::string out =
        "family,variant,groups,dim,sizes,separation,k,alpha,replications,seed,"
        "method,n_perm,rejections,rejection_rate,mc_stderr\n";
    for (const auto& report : reports) {
      std::string sizes_field;
      for (const int n : sizes_of(report.scenario)) {
        if (!sizes_field.empty()) sizes_field += '|';
        sizes_field += std::to_string(n);
      }
      for (const auto& entry : report.tests) {
        out += gkst::family_name(report.scenario.family) + ',';
        out += report.scenario.variant == gkst::Variant::scale ? "scale" : "location";
        out += ',' + std::to_string(report.scenario.groups);
        out += ',' + std::to_string(report.scenario.dim);
        out += ',' + sizes_field;
        out += ',' + dtos(report.scenario.separation);
        out += ',' + std::to_string(report.k_mst);
        out += ',' + dtos(report.alpha);
        out += ',' + std::to_string(report.replications);
        out += ',' + std::to_string(report.seed);
        out += ',' + gkst::method_name(entry.method);
        out += ',' + std::to_string(entry.n_perm);
        out += ',' + std::to_string(entry.rejections);
        out += ',' + dtos(entry.rejection_rate);
        out += ',' + dtos(entry.mc_stderr);
        out += '\n';
      }
    }
    write_output(common.out, out);
    return 0;
  }
  ordered_json doc;
  doc["schema"] = "gkst.power_report/1";
  doc["command"] = "power";
  doc["rows"] = ordered_json::array();
  for (const auto& report : reports) {
    for (const auto& entry : report.tests) {
      ordered_json row;
      row["family"] = gkst::family_name(report.scenario.family);
      row["variant"] = report.scenario.variant == gkst::Variant::scale ? "scale" : "location";
      row["groups"] = report.scenario.groups;
      row["dim"] = report.scenario.dim;
      row["sizes"] = sizes_of(report.scenario);
      row["separation"] = report.scenario.separation;
      row["k"] = report.k_mst;
      row["alpha"] = report.alpha;
      row["replications"] = report.replications;
      row["seed"] = report.seed;
      row["method"] = gkst::method_name(entry.method);
      row["n_perm"] = entry.n_perm;
      row["rejections"] = entry.rejections;
      row["rejection_rate"] = entry.rejection_rate;
      row["mc_stderr"] = entry.mc_stderr;
      doc["rows"].push_back(row);
    }
  }
  write_output(common.out, doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// qq

int cmd_qq(const ScenarioOpts& scenario, const CommonOpts& common, int reps) {
  if (reps < 0) throw gkst::input_error("--reps must be >= 0");
  const ScenarioPlan plan = scenario_from_opts(scenario);
  if (plan.separations.size() != 1) {
    throw gkst::input_error("qq takes a single separation, not a sweep");
  }
  gkst::ScenarioSpec spec = plan.spec;
  spec.separation = plan.separations[0];
  spec.validate();
  if (spec.groups < 2) throw gkst::input_error("qq needs at least two groups");

  std::vector<gkst::StatKind> kinds;
  if (common.stats.empty()) {
    kinds = {gkst::StatKind::SW, gkst::StatKind::SB, gkst::StatKind::SA};
  } else {
    for (const std::string& s : common.stats) {
      if (s == "SW") kinds.push_back(gkst::StatKind::SW);
      else if (s == "SB") kinds.push_back(gkst::StatKind::SB);
      else if (s == "SA") kinds.push_back(gkst::StatKind::SA);
      else {
        throw gkst::input_error("qq compares SW, SB, and SA to their chi-square references; '" +
                                s + "' has none");
      }
    }
  }

  const std::size_t n_kinds = kinds.size();
  std::vector<double> values(n_kinds * static_cast<std::size_t>(reps), 0.0);
  std::vector<int> dofs(n_kinds * static_cast<std::size_t>(reps), 0);
  gkst::parallel_for(static_cast<std::size_t>(reps), common.threads, [&](std::size_t r) {
    try {
      const std::uint64_t rep_seed = gkst::substream_seed(common.seed, r);
      const gkst::Dataset data = gkst::generate_scenario(spec, rep_seed);
      const gkst::DistanceMatrix dist = gkst::pairwise_distances(data, gkst::Metric::euclidean);
      const gkst::SimilarityGraph g = gkst::build_kmst(dist, common.k);
      const std::vector<int> sizes = gkst::group_sizes_from_labels(data.labels);
      const int K = static_cast<int>(sizes.size());
      const gkst::EdgeCounts counts = gkst::count_edges(g, data.labels, K);
      const gkst::NullMoments moments = g.n >= 4 ? gkst::null_moments(g, sizes)
                                                 : gkst::exact_moments_bruteforce(g, sizes);
      for (std::size_t t = 0; t < n_kinds; ++t) {
        gkst::StatValue sv;
        switch (kinds[t]) {
          case gkst::StatKind::SW: sv = gkst::stat_sw(counts, moments); break;
          case gkst::StatKind::SB: sv = gkst::stat_sb(counts, moments); break;
          default: sv = gkst::stat_sa(counts, moments); break;
        }
        values[t * static_cast<std::size_t>(reps) + r] = sv.value;
        // SW is referred to K degrees of freedom; SB and SA to the rank used.
        dofs[t * static_cast<std::size_t>(reps) + r] = kinds[t] == gkst::StatKind::SW ? K : sv.dof;
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("qq: replicate " + std::to_string(r) + ": " + e.what());
    }
  });

  struct KindRows {
    std::string name;
    int dof = 0;
    std::vector<double> sorted;
  };
  std::vector<KindRows> rows;
  for (std::size_t t = 0; t < n_kinds; ++t) {
    KindRows kr;
    kr.name = gkst::stat_name(kinds[t]);
    if (reps > 0) {
      kr.dof = dofs[t * static_cast<std::size_t>(reps)];
      for (int r = 0; r < reps; ++r) {
        const int dof_r = dofs[t * static_cast<std::size_t>(reps) + static_cast<std::size_t>(r)];
        if (dof_r != kr.dof) {
          std::cerr << "warning: " << kr.name << ": covariance rank varies across replicates ("
                    << kr.dof << " vs " << dof_r << "); reference uses the first\n";
          break;
        }
      }
      kr.sorted.assign(values.begin() + static_cast<std::ptrdiff_t>(t * static_cast<std::size_t>(reps)),
                       values.begin() + static_cast<std::ptrdiff_t>((t + 1) * static_cast<std::size_t>(reps)));
      std::sort(kr.sorted.begin(), kr.sorted.end());
    }
    rows.push_back(std::move(kr));
  }

  // Quantile pairs at plotting positions (i - 0.5) / reps, both columns
  // ascending.
  const std::string format = common.format.empty() ? "csv" : common.format;
  if (format == "csv") {
    std::string out = "statistic,dof,index,empirical,theoretical\n";
    for (const auto& kr : rows) {
      for (std::size_t i = 0; i < kr.sorted.size(); ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(reps);
        out += kr.name + ',' + std::to_string(kr.dof) + ',' + std::to_string(i + 1) + ',' +
               dtos(kr.sorted[i]) + ',' + dtos(gkst::chi_square_quantile(p, kr.dof)) + '\n';
      }
    }
    write_output(common.out, out);
    return 0;
  }
  ordered_json doc;
  doc["schema"] = "gkst.qq_pairs/1";
  doc["command"] = "qq";
  doc["replications"] = reps;
  doc["rows"] = ordered_json::array();
  for (const auto& kr : rows) {
    for (std::size_t i = 0; i < kr.sorted.size(); ++i) {
      const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(reps);
      ordered_json row;
      row["statistic"] = kr.name;
      row["dof"] = kr.dof;
      row["index"] = i + 1;
      row["empirical"] = kr.sorted[i];
      row["theoretical"] = gkst::chi_square_quantile(p, kr.dof);
      doc["rows"].push_back(row);
    }
  }
  write_output(common.out, doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------
// diag

struct ViewDiag {
  std::string name;
  int dim = 0;
  int rank = 0;
  std::optional<double> condition_number;  // largest / smallest retained eigenvalue
};

ViewDiag diagnose_view(const std::string& name, const Eigen::MatrixXd& cov) {
  ViewDiag v;
  v.name = name;
  v.dim = static_cast<int>(cov.rows());
  if (v.dim == 0) return v;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd evs = es.eigenvalues();  // ascending
  const double largest = evs(v.dim - 1);
  const double tol = v.dim * std::numeric_limits<double>::epsilon() *
                     std::max(std::abs(evs(0)), std::abs(largest));
  double smallest_kept = 0.0;
  for (int i = 0; i < v.dim; ++i) {
    if (evs(i) > tol) {
      if (v.rank == 0) smallest_kept = evs(i);
      ++v.rank;
    }
  }
  if (v.rank > 0) v.condition_number = largest / smallest_kept;
  return v;
}

int cmd_diag(const InputOpts& in, const CommonOpts& common) {
  const std::string format = common.format.empty() ? "json" : common.format;
  if (format != "json") {
    throw gkst::input_error("diag emits nested matrices; only --format json is supported");
  }
  const LoadedInput input = load_input(in, common);
  const gkst::SimilarityGraph g = gkst::build_kmst(input.dist, common.k);
  const std::vector<int> sizes = gkst::group_sizes_from_labels(input.labels);
  const int K = static_cast<int>(sizes.size());
  const gkst::EdgeCounts counts = gkst::count_edges(g, input.labels, K);
  const gkst::NullMoments moments =
      g.n >= 4 ? gkst::null_moments(g, sizes) : gkst::exact_moments_bruteforce(g, sizes);

  ordered_json doc;
  doc["schema"] = "gkst.diagnostics/1";
  doc["command"] = "diag";
  ordered_json input_j;
  input_j["kind"] = input.kind;
  input_j["path"] = input.path;
  input_j["n"] = static_cast<int>(input.labels.size());
  input_j["dim"] = input.dim ? ordered_json(*input.dim) : ordered_json(nullptr);
  input_j["metric"] = input.kind == "distances" ? "precomputed" : common.metric;
  doc["input"] = input_j;
  doc["groups"] = groups_to_json(sizes, input.label_names);
  doc["graph"] = graph_to_json(common.k, g.n, gkst::condition_stats(g));

  doc["covariances"] = ordered_json::array();
  const std::vector<std::pair<std::string, std::vector<int>>> views = {
      {"within", gkst::NullMoments::within_indices(K)},
      {"between", gkst::NullMoments::between_indices(K)},
      {"all_but_last", gkst::NullMoments::all_but_last_indices(K)},
  };
  for (const auto& [name, idx] : views) {
    const ViewDiag v = diagnose_view(name, moments.cov_view(idx));
    ordered_json vj;
    vj["view"] = v.name;
    vj["dim"] = v.dim;
    vj["rank"] = v.rank;
    vj["condition_number"] =
        v.condition_number ? ordered_json(*v.condition_number) : ordered_json(nullptr);
    doc["covariances"].push_back(vj);
  }

  // Standardized counts (count - mean) / sd, null where the null variance
  // vanishes (for example any entry when only one group is present).
  const Eigen::MatrixXd z = gkst::standardized_counts(counts, moments);
  ordered_json zj = ordered_json::array();
  for (int i = 0; i < z.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < z.cols(); ++j) {
      row.push_back(std::isnan(z(i, j)) ? ordered_json(nullptr) : ordered_json(z(i, j)));
    }
    zj.push_back(row);
  }
  doc["standardized_counts"] = zj;
  write_output(common.out, doc.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

void add_common_options(CLI::App* cmd, CommonOpts& common, bool with_stats) {
  cmd->add_option("--k", common.k, "Number of edge-disjoint spanning trees in the graph")
      ->default_val(5)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", common.seed, "Master seed; all randomness derives from it")
      ->default_val(0);
  cmd->add_option("--out", common.out, "Output path (default: stdout)");
  cmd->add_option("--format", common.format, "Output format (default: json for test/diag, csv for power/qq)")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--threads", common.threads, "Worker threads; results do not depend on this")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  if (with_stats) {
    cmd->add_option("--stat", common.stats,
                    "Statistic selection, repeatable: SW, SB, SA, S, SS "
                    "(default: SS and SA, plus permutation S when --mode includes perm)");
    cmd->add_option("--mode", common.mode, "asym, perm, or both")
        ->default_val("asym")
        ->check(CLI::IsMember({"asym", "perm", "both"}));
    cmd->add_option("--alpha", common.alpha, "Rejection level")->default_val(0.05);
    cmd->add_option("--perms", common.perms, "Permutations per permutation test")
        ->default_val(1000)
        ->check(CLI::PositiveNumber);
  }
}

void add_input_options(CLI::App* cmd, InputOpts& in, CommonOpts& common) {
  cmd->add_option("--input", in.features, "Feature CSV: header row, one observation per row");
  cmd->add_option("--label-col", in.label_col, "Label column name in the feature CSV")
      ->default_val("label");
  cmd->add_option("--distances", in.distances, "Square distance CSV, no header");
  cmd->add_option("--labels", in.labels, "Label file, one label per line, paired with --distances");
  cmd->add_option("--metric", common.metric, "euclidean, manhattan, or precomputed")
      ->default_val("euclidean")
      ->check(CLI::IsMember({"euclidean", "manhattan", "precomputed"}));
}

void add_scenario_options(CLI::App* cmd, ScenarioOpts& s, bool sweep) {
  cmd->add_option("--family", s.family,
                  "Scenario family: S1_location, S2_scale, S3_covariance, S4_kurtosis, "
                  "S5_skew_kurtosis, S6_lognormal, S7_student_t (short forms S1..S7)");
  cmd->add_option("--groups", s.groups, "Number of groups")->default_val(3);
  cmd->add_option("--dim", s.dim, "Dimension")->default_val(50);
  cmd->add_option("--sizes", s.sizes, "Group sizes, comma separated (default: 50 per group)")
      ->delimiter(',');
  cmd->add_option("--separation", s.separations,
                  sweep ? "Separation grid, repeatable or comma separated (default: 0)"
                        : "Separation (default: 0, the null)")
      ->delimiter(',');
  cmd->add_option("--variant", s.variant, "location or scale (S6 and S7 only)")
      ->default_val("location")
      ->check(CLI::IsMember({"location", "scale"}));
  cmd->add_option("--scenario-file", s.file, "JSON scenario spec, replaces the flags above");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based K-sample tests of distributional equality"};
  app.require_subcommand(1);

  InputOpts test_in, diag_in;
  CommonOpts test_common, power_common, qq_common, diag_common;
  ScenarioOpts power_scenario, qq_scenario;
  int power_reps = 200;
  int qq_reps = 1000;

  CLI::App* test_cmd = app.add_subcommand("test", "Run the selected tests on a dataset");
  add_input_options(test_cmd, test_in, test_common);
  add_common_options(test_cmd, test_common, true);

  CLI::App* power_cmd =
      app.add_subcommand("power", "Rejection rates over simulated scenario replicates");
  add_scenario_options(power_cmd, power_scenario, true);
  add_common_options(power_cmd, power_common, true);
  power_cmd->add_option("--reps", power_reps, "Scenario replicates per grid point")
      ->default_val(200)
      ->check(CLI::PositiveNumber);

  CLI::App* qq_cmd =
      app.add_subcommand("qq", "Null quantile pairs against the chi-square reference");
  add_scenario_options(qq_cmd, qq_scenario, false);
  add_common_options(qq_cmd, qq_common, false);
  qq_cmd->add_option("--stat", qq_common.stats, "Statistics to include: SW, SB, SA (default: all)");
  qq_cmd->add_option("--reps", qq_reps, "Null replicates (0 allowed: header-only output)")
      ->default_val(1000)
      ->check(CLI::NonNegativeNumber);

  CLI::App* diag_cmd =
      app.add_subcommand("diag", "Graph and covariance diagnostics for a dataset");
  add_input_options(diag_cmd, diag_in, diag_common);
  add_common_options(diag_cmd, diag_common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (test_cmd->parsed()) {
      test_common.metric_set = test_cmd->count("--metric") > 0;
      return cmd_test(test_in, test_common);
    }
    if (power_cmd->parsed()) return cmd_power(power_scenario, power_common, power_reps);
    if (qq_cmd->parsed()) return cmd_qq(qq_scenario, qq_common, qq_reps);
    if (diag_cmd->parsed()) {
      diag_common.metric_set = diag_cmd->count("--metric") > 0;
      return cmd_diag(diag_in, diag_common);
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const gkst::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gkst::size_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
