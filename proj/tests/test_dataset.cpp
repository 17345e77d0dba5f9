// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "qlab/dataset.hpp"

using qlab::Dataset;
using qlab::TauGrid;
using qlab::ValidationError;

namespace {

std::string temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "qlab_test_dataset";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("reference sample shape and values") {
  const Dataset ds = qlab::reference_dataset();
  CHECK(ds.n == 20);
  CHECK(ds.p == 2);
  CHECK(ds.intercept);
  CHECK(ds.feature_names.size() == 2);
  CHECK(ds.feature_names[0] == "(intercept)");
  // spot checks, 4-decimal published precision
  CHECK(ds.xat(0, 1) == doctest::Approx(0.2095).epsilon(1e-12));
  CHECK(ds.xat(19, 1) == doctest::Approx(9.9582).epsilon(1e-12));
  CHECK(ds.y[0] == doctest::Approx(1.7727).epsilon(1e-4));
  CHECK(ds.y[8] == doctest::Approx(4.3145).epsilon(1e-4));
  CHECK(ds.y[18] == doctest::Approx(0.3689).epsilon(1e-4));
  for (std::size_t i = 0; i + 1 < ds.n; ++i) {
    CHECK(ds.xat(i, 1) < ds.xat(i + 1, 1));  // rows sorted by prior score
  }
  CHECK_NOTHROW(ds.validate());
}

TEST_CASE("make_dataset rejects malformed input") {
  CHECK_THROWS_AS(qlab::make_dataset({{1.0, 2.0}, {3.0}}, {1.0, 2.0}, {"a", "b"}, false),
                  ValidationError);
  CHECK_THROWS_AS(qlab::make_dataset({{1.0, 2.0}}, {1.0, 2.0}, {"a", "b"}, false),
                  ValidationError);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(qlab::make_dataset({{1.0, nan, 2.0}}, {1.0, 2.0, 3.0}, {"a"}, true),
                  ValidationError);
  CHECK_THROWS_AS(qlab::make_dataset({{1.0, 2.0, 3.0}}, {1.0, nan, 3.0}, {"a"}, true),
                  ValidationError);
}

TEST_CASE("csv round-trip preserves twelve significant digits") {
  Dataset ds = qlab::make_dataset(
      {{0.123456789012, 3.14159265358979, -2.71828182845905},
       {10.0, -0.000123456789012, 1e6}},
      {1.77268, -0.368901, 42.4242424242}, {"a", "b"}, true);
  const std::string path = temp_file("roundtrip.csv");
  qlab::write_csv(path, ds, "y");
  const Dataset back = qlab::load_csv(path, "y", true);
  REQUIRE(back.n == ds.n);
  REQUIRE(back.p == ds.p);
  CHECK(back.feature_names == ds.feature_names);
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t k = 0; k < ds.p; ++k) {
      CHECK(back.xat(i, k) ==
            doctest::Approx(ds.xat(i, k)).epsilon(1e-11));
    }
    CHECK(back.y[i] == doctest::Approx(ds.y[i]).epsilon(1e-11));
  }
}

TEST_CASE("csv loader handles quotes and CRLF") {
  const std::string path = temp_file("quoted.csv");
  write_file(path, "\"x\",\"y\"\r\n\"1.5\",2.5\r\n3.5,\"4.5\"\r\n");
  const Dataset ds = qlab::load_csv(path, "y", false);
  REQUIRE(ds.n == 2);
  CHECK(ds.xat(0, 0) == 1.5);
  CHECK(ds.y[0] == 2.5);
  CHECK(ds.xat(1, 0) == 3.5);
  CHECK(ds.y[1] == 4.5);
}

TEST_CASE("csv loader errors name the offending location") {
  const std::string path = temp_file("bad_cell.csv");
  write_file(path, "x,y\n1.0,2.0\noops,3.0\n");
  CHECK_THROWS_WITH_AS(qlab::load_csv(path, "y", false),
                       doctest::Contains("'x'"), ValidationError);

  const std::string missing = temp_file("missing_col.csv");
  write_file(missing, "a,b\n1,2\n");
  CHECK_THROWS_WITH_AS(qlab::load_csv(missing, "y", false),
                       doctest::Contains("response column"), ValidationError);
}

TEST_CASE("header-only file needs allow_empty") {
  const std::string path = temp_file("empty.csv");
  write_file(path, "x,y\n");
  CHECK_THROWS_AS(qlab::load_csv(path, "y", true), ValidationError);
  const Dataset ds = qlab::load_csv(path, "y", true, true);
  CHECK(ds.n == 0);
  CHECK(ds.p == 2);
  CHECK(ds.feature_names ==
        std::vector<std::string>{"(intercept)", "x"});
}

TEST_CASE("tau grid validation") {
  CHECK_THROWS_AS(TauGrid(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(TauGrid({0.0, 0.5}), ValidationError);
  CHECK_THROWS_AS(TauGrid({0.5, 1.0}), ValidationError);
  CHECK_THROWS_AS(TauGrid({1.5}), ValidationError);
  CHECK_THROWS_AS(TauGrid({0.2, 0.2}), ValidationError);
  CHECK_THROWS_AS(TauGrid({0.3, 0.2}), ValidationError);
  CHECK_NOTHROW(TauGrid({0.10, 0.15}));

  const TauGrid grid = TauGrid::percentile_grid();
  REQUIRE(grid.size() == 99);
  CHECK(grid[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(grid[49] == doctest::Approx(0.50).epsilon(1e-12));
  CHECK(grid[98] == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("dataset validate enforces intercept column") {
  Dataset ds = qlab::make_dataset({{1.0, 2.0, 3.0}}, {1.0, 2.0, 3.0}, {"x"}, true);
  ds.x[0] = 0.5;  // corrupt the intercept entry
  CHECK_THROWS_AS(ds.validate(), ValidationError);
}
