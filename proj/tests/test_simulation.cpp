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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "gkst/simulation.hpp"

namespace {

// Mean over a block of rows and every coordinate.
double block_mean(const Eigen::MatrixXd& m, int row0, int rows) {
  return m.middleRows(row0, rows).mean();
}

double block_variance(const Eigen::MatrixXd& m, int row0, int rows) {
  const auto block = m.middleRows(row0, rows);
  const double mean = block.mean();
  return (block.array() - mean).square().mean();
}

// Pooled lag-1 autocorrelation across coordinates of a row block.
double block_lag1(const Eigen::MatrixXd& m, int row0, int rows) {
  double num = 0.0, den = 0.0;
  const double mean = block_mean(m, row0, rows);
  for (int r = row0; r < row0 + rows; ++r) {
    for (int t = 0; t + 1 < m.cols(); ++t) {
      num += (m(r, t) - mean) * (m(r, t + 1) - mean);
    }
    for (int t = 0; t < m.cols(); ++t) {
      den += (m(r, t) - mean) * (m(r, t) - mean);
    }
  }
  return num / den;
}

}  // namespace

TEST_CASE("scenario names round-trip and parse short ids") {
  using gkst::Family;
  for (const auto f : {Family::S1_location, Family::S2_scale, Family::S3_covariance,
                       Family::S4_kurtosis, Family::S5_skew_kurtosis, Family::S6_lognormal,
                       Family::S7_student_t}) {
    CHECK(gkst::family_from_name(gkst::family_name(f)) == f);
  }
  CHECK(gkst::family_from_name("S1") == Family::S1_location);
  CHECK(gkst::family_from_name("S6") == Family::S6_lognormal);
  CHECK_THROWS_AS(gkst::family_from_name("S9"), gkst::input_error);
}

TEST_CASE("scenario validation enforces family parameter ranges") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S2_scale;
  spec.groups = 3;
  spec.separation = -0.6;  // variance at the last group would be -0.2
  CHECK_THROWS_AS(spec.validate(), gkst::input_error);

  spec.family = gkst::Family::S3_covariance;
  spec.separation = 0.5;  // rho_3 = 1.1
  CHECK_THROWS_AS(spec.validate(), gkst::input_error);
  spec.separation = 0.3;
  CHECK_NOTHROW(spec.validate());

  spec.family = gkst::Family::S4_kurtosis;
  spec.separation = -0.1;  // df below 2
  CHECK_THROWS_AS(spec.validate(), gkst::input_error);

  spec.family = gkst::Family::S1_location;
  spec.variant = gkst::Variant::scale;  // scale variant is S6/S7 vocabulary
  spec.separation = 0.1;
  CHECK_THROWS_AS(spec.validate(), gkst::input_error);
  spec.variant = gkst::Variant::location;
  spec.groups = 0;
  CHECK_THROWS_AS(spec.validate(), gkst::input_error);
  spec.groups = 2;
  spec.group_sizes = {5, 5, 5};  // length disagrees with groups
  CHECK_THROWS_AS(spec.validate(), gkst::input_error);
}

TEST_CASE("generated datasets have the declared shape and block labels") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S1_location;
  spec.groups = 3;
  spec.dim = 7;
  spec.group_sizes = {4, 5, 6};
  spec.separation = 0.2;
  const auto data = gkst::generate_scenario(spec, 11);
  CHECK(data.n() == 15);
  CHECK(data.dim() == 7);
  CHECK(data.group_sizes() == std::vector<int>{4, 5, 6});
  CHECK(data.labels == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2});

  // Default sizes: 50 per group.
  spec.group_sizes.clear();
  CHECK(gkst::generate_scenario(spec, 1).n() == 150);
}

TEST_CASE("generation is seed-deterministic") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S6_lognormal;
  spec.groups = 3;
  spec.dim = 20;
  spec.group_sizes = {10, 10, 10};
  spec.separation = 0.04;
  const auto a = gkst::generate_scenario(spec, 42);
  const auto b = gkst::generate_scenario(spec, 42);
  CHECK(a.points == b.points);
  const auto c = gkst::generate_scenario(spec, 43);
  CHECK(a.points != c.points);
}

TEST_CASE("location family shifts group means on schedule") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S1_location;
  spec.groups = 3;
  spec.dim = 50;
  spec.group_sizes = {50, 50, 50};
  spec.separation = 0.14;
  const auto data = gkst::generate_scenario(spec, 7);
  // Group 3 mean is 0.28 across 2500 draws: se = 1/sqrt(2500) = 0.02.
  CHECK(block_mean(data.points, 0, 50) == Catch::Approx(0.0).margin(0.06));
  CHECK(block_mean(data.points, 50, 50) == Catch::Approx(0.14).margin(0.06));
  CHECK(block_mean(data.points, 100, 50) == Catch::Approx(0.28).margin(0.06));

  // Zero separation collapses to the common null.
  spec.separation = 0.0;
  const auto null_data = gkst::generate_scenario(spec, 8);
  CHECK(block_mean(null_data.points, 100, 50) == Catch::Approx(0.0).margin(0.06));
}

TEST_CASE("scale family inflates group variances on schedule") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S2_scale;
  spec.groups = 3;
  spec.dim = 100;
  spec.group_sizes = {50, 50, 50};
  spec.separation = 0.08;
  const auto data = gkst::generate_scenario(spec, 9);
  // Var(s^2) ~ 2 sigma^4 / n over n = 5000 coordinate draws.
  CHECK(block_variance(data.points, 0, 50) == Catch::Approx(1.0).margin(0.08));
  CHECK(block_variance(data.points, 50, 50) == Catch::Approx(1.08).margin(0.09));
  CHECK(block_variance(data.points, 100, 50) == Catch::Approx(1.16).margin(0.09));
  CHECK(block_mean(data.points, 100, 50) == Catch::Approx(0.0).margin(0.05));
}

TEST_CASE("AR factorization reproduces the covariance") {
  for (const int d : {5, 50, 300}) {
    for (const double rho : {0.1, 0.4, 0.85}) {
      const Eigen::MatrixXd sigma = gkst::ar1_covariance(d, rho);
      const Eigen::MatrixXd l = gkst::cholesky_lower(sigma);
      const double err = (l * l.transpose() - sigma).cwiseAbs().maxCoeff();
      INFO("d = " << d << ", rho = " << rho);
      CHECK(err <= 1e-10);
      CHECK(l(0, d - 1) == 0.0);  // genuinely lower triangular
    }
  }
  CHECK_THROWS_AS(gkst::ar1_covariance(5, 1.0), gkst::input_error);
}

TEST_CASE("correlation family tracks its autoregression schedule") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S3_covariance;
  spec.groups = 3;
  spec.dim = 100;
  spec.group_sizes = {50, 50, 50};
  spec.separation = 0.15;  // rho = 0.1, 0.25, 0.4
  const auto data = gkst::generate_scenario(spec, 13);
  CHECK(block_lag1(data.points, 0, 50) == Catch::Approx(0.10).margin(0.05));
  CHECK(block_lag1(data.points, 50, 50) == Catch::Approx(0.25).margin(0.05));
  CHECK(block_lag1(data.points, 100, 50) == Catch::Approx(0.40).margin(0.05));
  CHECK(block_variance(data.points, 100, 50) == Catch::Approx(1.0).margin(0.08));
}

TEST_CASE("heavy-tail family standardizes to unit variance where defined") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S4_kurtosis;
  spec.groups = 3;
  spec.dim = 100;
  spec.group_sizes = {50, 50, 50};
  spec.separation = 8.0;  // dfs 2, 10, 18: finite fourth moments beyond group 1
  const auto data = gkst::generate_scenario(spec, 15);
  for (const int grp : {1, 2}) {
    CHECK(block_mean(data.points, 50 * grp, 50) == Catch::Approx(0.0).margin(0.06));
    CHECK(block_variance(data.points, 50 * grp, 50) == Catch::Approx(1.0).margin(0.12));
  }
  CHECK(data.points.allFinite());  // the df = 2 group has no variance to check
}

TEST_CASE("skewed family standardizes mean and variance and keeps its skew") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S5_skew_kurtosis;
  spec.groups = 3;
  spec.dim = 100;
  spec.group_sizes = {50, 50, 50};
  spec.separation = 2.0;  // dfs 1, 3, 5
  const auto data = gkst::generate_scenario(spec, 17);
  for (const int grp : {0, 1, 2}) {
    CHECK(block_mean(data.points, 50 * grp, 50) == Catch::Approx(0.0).margin(0.08));
    CHECK(block_variance(data.points, 50 * grp, 50) == Catch::Approx(1.0).margin(0.3));
  }
  // Skewness of standardized chi-square_1 is sqrt(8): strongly positive.
  const auto block = data.points.topRows(50);
  const double skew = (block.array() - block.mean()).cube().mean();
  CHECK(skew > 0.5);
}

TEST_CASE("lognormal family is positive with the right log-scale structure") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S6_lognormal;
  spec.groups = 3;
  spec.dim = 50;
  spec.group_sizes = {60, 60, 60};
  spec.separation = 0.2;
  spec.variant = gkst::Variant::location;
  const auto data = gkst::generate_scenario(spec, 19);
  CHECK((data.points.array() > 0.0).all());
  const Eigen::MatrixXd logs = data.points.array().log().matrix();
  CHECK(block_mean(logs, 0, 60) == Catch::Approx(0.0).margin(0.07));
  CHECK(block_mean(logs, 120, 60) == Catch::Approx(0.4).margin(0.07));
  CHECK(block_lag1(logs, 0, 60) == Catch::Approx(0.4).margin(0.06));

  spec.variant = gkst::Variant::scale;
  spec.separation = 0.5;
  const auto scaled = gkst::generate_scenario(spec, 20);
  const Eigen::MatrixXd slogs = scaled.points.array().log().matrix();
  CHECK(block_variance(slogs, 0, 60) == Catch::Approx(1.0).margin(0.1));
  CHECK(block_variance(slogs, 120, 60) == Catch::Approx(2.0).margin(0.2));
  CHECK(block_mean(slogs, 120, 60) == Catch::Approx(0.0).margin(0.1));
}

TEST_CASE("student-t family has heavy-tailed correlated coordinates") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S7_student_t;
  spec.groups = 2;
  spec.dim = 50;
  spec.group_sizes = {80, 80};
  spec.separation = 0.3;
  spec.variant = gkst::Variant::location;
  const auto data = gkst::generate_scenario(spec, 21);
  CHECK(block_mean(data.points, 0, 80) == Catch::Approx(0.0).margin(0.08));
  CHECK(block_mean(data.points, 80, 80) == Catch::Approx(0.3).margin(0.08));
  // Coordinate variance of the t_20 driver: 20/18 of the Gaussian base. The
  // shared per-observation mixing weight widens the estimator, so margins
  // are looser than the Gaussian families use.
  CHECK(block_variance(data.points, 0, 80) == Catch::Approx(20.0 / 18.0).margin(0.16));
  CHECK(block_lag1(data.points, 0, 80) == Catch::Approx(0.4).margin(0.06));

  spec.variant = gkst::Variant::scale;
  spec.separation = 0.8;
  const auto scaled = gkst::generate_scenario(spec, 22);
  const double v0 = block_variance(scaled.points, 0, 80);
  const double v1 = block_variance(scaled.points, 80, 80);
  CHECK(v1 / v0 == Catch::Approx(1.8).margin(0.4));
}

TEST_CASE("estimate_power is deterministic and thread-count independent") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S1_location;
  spec.groups = 3;
  spec.dim = 10;
  spec.group_sizes = {10, 10, 10};
  spec.separation = 0.0;
  const std::vector<gkst::TestConfig> tests = {{gkst::Method::SS_fast, 0},
                                               {gkst::Method::perm_S, 49}};
  const auto a = gkst::estimate_power(spec, tests, 0.05, 30, 99, 2, 1);
  const auto b = gkst::estimate_power(spec, tests, 0.05, 30, 99, 2, 3);
  REQUIRE(a.tests.size() == 2);
  for (std::size_t t = 0; t < 2; ++t) {
    CHECK(a.tests[t].rejections == b.tests[t].rejections);
    CHECK(a.tests[t].rejection_rate ==
          Catch::Approx(static_cast<double>(a.tests[t].rejections) / 30.0));
    CHECK(a.tests[t].mc_stderr ==
          Catch::Approx(std::sqrt(a.tests[t].rejection_rate * (1.0 - a.tests[t].rejection_rate) / 30.0)));
  }
  CHECK(a.tests[0].n_perm == 0);  // asymptotic method: no permutations
  CHECK(a.tests[1].n_perm == 49);
}

TEST_CASE("estimate_power separates null from a gross alternative") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S1_location;
  spec.groups = 3;
  spec.dim = 20;
  spec.group_sizes = {15, 15, 15};
  spec.separation = 0.0;
  const std::vector<gkst::TestConfig> tests = {{gkst::Method::SS_fast, 0}};

  const auto null_report = gkst::estimate_power(spec, tests, 0.05, 60, 7, 3, 1);
  // 5-sigma binomial ceiling around alpha.
  CHECK(null_report.tests[0].rejection_rate <= 0.05 + 5.0 * std::sqrt(0.05 * 0.95 / 60.0));

  spec.separation = 1.0;  // group means 0, 1, 2 in every one of 20 coordinates
  const auto alt_report = gkst::estimate_power(spec, tests, 0.05, 60, 7, 3, 1);
  CHECK(alt_report.tests[0].rejection_rate >= 0.9);
}

TEST_CASE("estimate_power validates its arguments") {
  gkst::ScenarioSpec spec;
  spec.family = gkst::Family::S1_location;
  spec.groups = 2;
  spec.dim = 5;
  spec.group_sizes = {5, 5};
  const std::vector<gkst::TestConfig> tests = {{gkst::Method::SS_fast, 0}};
  CHECK_THROWS_AS(gkst::estimate_power(spec, {}, 0.05, 10, 1), gkst::input_error);
  CHECK_THROWS_AS(gkst::estimate_power(spec, tests, 0.0, 10, 1), gkst::input_error);
  CHECK_THROWS_AS(gkst::estimate_power(spec, tests, 1.0, 10, 1), gkst::input_error);
  CHECK_THROWS_AS(gkst::estimate_power(spec, tests, 0.05, 0, 1), gkst::input_error);
  spec.groups = 1;
  spec.group_sizes = {10};
  CHECK_THROWS_AS(gkst::estimate_power(spec, tests, 0.05, 10, 1), gkst::input_error);
}
