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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gkst/distance.hpp"
#include "gkst/io.hpp"

namespace {

// Temp file that removes itself; contents written on construction.
class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path_ = (std::filesystem::temp_directory_path() /
             ("gkst_io_test_" + std::to_string(++counter) + ".csv"))
                .string();
    std::ofstream out(path_, std::ios::binary);
    out << contents;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

TEST_CASE("feature CSV round-trips values and maps labels by first appearance") {
  const TempFile f("x1,group,x2\n1.0,b,2.0\n3.5,a,-4.0\n0.25,b,1e2\n");
  const auto loaded = gkst::read_feature_csv(f.path(), "group");
  CHECK(loaded.data.n() == 3);
  CHECK(loaded.data.dim() == 2);
  CHECK(loaded.label_names == std::vector<std::string>{"b", "a"});
  CHECK(loaded.data.labels == std::vector<int>{0, 1, 0});
  CHECK(loaded.data.points(0, 0) == 1.0);
  CHECK(loaded.data.points(0, 1) == 2.0);
  CHECK(loaded.data.points(1, 1) == -4.0);
  CHECK(loaded.data.points(2, 1) == 100.0);
}

TEST_CASE("feature CSV tolerates CRLF endings and a UTF-8 BOM") {
  const TempFile f("\xef\xbb\xbfv,label\r\n1.5,x\r\n2.5,y\r\n");
  const auto loaded = gkst::read_feature_csv(f.path(), "label");
  CHECK(loaded.data.n() == 2);
  CHECK(loaded.data.dim() == 1);
  CHECK(loaded.label_names == std::vector<std::string>{"x", "y"});
  CHECK(loaded.data.points(1, 0) == 2.5);
}

TEST_CASE("feature CSV rejects malformed input") {
  const TempFile missing_col("a,b\n1,2\n");
  CHECK_THROWS_AS(gkst::read_feature_csv(missing_col.path(), "group"), gkst::input_error);

  const TempFile ragged("a,group\n1,x\n1,2,3\n");
  CHECK_THROWS_AS(gkst::read_feature_csv(ragged.path(), "group"), gkst::input_error);

  const TempFile non_numeric("a,group\nfoo,x\n");
  CHECK_THROWS_AS(gkst::read_feature_csv(non_numeric.path(), "group"), gkst::input_error);

  const TempFile only_labels("group\nx\n");
  CHECK_THROWS_AS(gkst::read_feature_csv(only_labels.path(), "group"), gkst::input_error);

  const TempFile dup("group,group\n1,x\n");
  CHECK_THROWS_AS(gkst::read_feature_csv(dup.path(), "group"), gkst::input_error);

  const TempFile header_only("a,group\n");
  CHECK_THROWS_AS(gkst::read_feature_csv(header_only.path(), "group"), gkst::input_error);

  CHECK_THROWS_AS(gkst::read_feature_csv("/nonexistent/file.csv", "group"), gkst::input_error);
}

TEST_CASE("distance CSV reads a square matrix without header") {
  const TempFile f("0,1,2\n1,0,1.5\n2,1.5,0\n");
  const auto m = gkst::read_distance_csv(f.path());
  REQUIRE(m.rows() == 3);
  CHECK(m(0, 2) == 2.0);
  CHECK(m(2, 1) == 1.5);
  CHECK_NOTHROW(gkst::DistanceMatrix::from_matrix(m));

  const TempFile rect("0,1\n1,0\n2,2\n");
  CHECK_THROWS_AS(gkst::read_distance_csv(rect.path()), gkst::input_error);
}

TEST_CASE("label files read one label per line") {
  const TempFile f("alpha\nbeta\nalpha\n");
  const auto raw = gkst::read_label_lines(f.path());
  CHECK(raw == std::vector<std::string>{"alpha", "beta", "alpha"});
  const auto [ids, names] = gkst::index_labels(raw);
  CHECK(ids == std::vector<int>{0, 1, 0});
  CHECK(names == std::vector<std::string>{"alpha", "beta"});

  const TempFile empty("");
  CHECK_THROWS_AS(gkst::read_label_lines(empty.path()), gkst::input_error);
}
