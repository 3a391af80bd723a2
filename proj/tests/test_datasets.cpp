// Copyright 2026 The greygp Authors
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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "greygp/datasets.hpp"
#include "oracles.hpp"

using namespace greygp;
using greygp::testing::rel_err;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const DataFormatError& e) {
    return e.line();
  }
  return 0;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("greygp_test_" + name);
}

}  // namespace

TEST_CASE("toy surface values") {
  CHECK(toy_surface(0.0, 4.0) == 0.0);
  CHECK(toy_surface(std::numbers::pi / 8.0, 4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(toy_surface(1.3, 0.0) == 0.0);
  CHECK(toy_surface(std::numbers::pi / 8.0, -9.0) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("toy surface symmetries") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u1(0.0, 10.0), u2(-5.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    const double a = u1(rng), b = u2(rng);
    CHECK(std::abs(toy_surface(a + kToyPeriod, b) - toy_surface(a, b)) < 1e-12);
    CHECK(toy_surface(-a, b) == -toy_surface(a, b));
    CHECK(toy_surface(a, -b) == toy_surface(a, b));
  }
}

TEST_CASE("coverage bands") {
  CHECK(coverage_band(0.0, 10.0, 20).hi == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(coverage_band(0.0, 10.0, 100).hi == 10.0);
  CHECK(coverage_band(-1.0, 1.0, 50).hi == doctest::Approx(0.0));
  for (int bad : {0, 5, 15, 110, -10}) {
    CHECK_FALSE(is_valid_coverage(bad));
    CHECK_THROWS_AS(coverage_band(0.0, 10.0, bad), std::invalid_argument);
  }
}

TEST_CASE("training samples respect the coverage band") {
  DomainSpec dom;
  const Dataset full = sample_coverage(dom, 100, 3);
  CHECK(full.size() == 1000);
  CHECK(full.coverage_pct == 100);

  dom.points_per_decile = 200;
  const Dataset d = sample_coverage(dom, 20, 3);
  CHECK(d.size() == 400);
  CHECK(d.x.col(0).minCoeff() >= 0.0);
  CHECK(d.x.col(0).maxCoeff() <= 2.0);
  CHECK(d.x.col(1).minCoeff() >= -5.0);
  CHECK(d.x.col(1).maxCoeff() <= 5.0);
  CHECK_THROWS_AS(sample_coverage(dom, 15, 3), std::invalid_argument);

  // Noise is small: targets stay close to the surface.
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    worst = std::max(worst, std::abs(d.y[i] - toy_surface(d.x(i, 0), d.x(i, 1))));
  }
  CHECK(worst < 6 * dom.noise_sd);
}

TEST_CASE("sampling is reproducible and seed dependent") {
  const DomainSpec dom;
  const Dataset a = sample_coverage(dom, 30, 77), b = sample_coverage(dom, 30, 77);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.x != sample_coverage(dom, 30, 78).x);
}

TEST_CASE("noise-free sampling matches the surface exactly") {
  DomainSpec dom;
  dom.noise_sd = 0.0;
  const Dataset d = sample_coverage(dom, 50, 1);
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
    CHECK(d.y[i] == toy_surface(d.x(i, 0), d.x(i, 1)));
  }
}

TEST_CASE("domain validation") {
  DomainSpec dom;
  dom.x1_range = {0.0, 4.0};
  CHECK_THROWS_AS(validate(dom), std::invalid_argument);
  dom = {};
  dom.x2_range = {1.0, 1.0};
  CHECK_THROWS_AS(validate(dom), std::invalid_argument);
  dom = {};
  dom.noise_sd = -0.1;
  CHECK_THROWS_AS(validate(dom), std::invalid_argument);
  dom = {};
  dom.grid_resolution = {0, 5};
  CHECK_THROWS_AS(validate(dom), std::invalid_argument);
}

TEST_CASE("evaluation grid") {
  DomainSpec dom;
  dom.grid_resolution = {2, 2};
  const EvaluationSet g = evaluation_grid(dom);
  REQUIRE(g.x.rows() == 4);
  CHECK(g.x(0, 0) == 0.0);
  CHECK(g.x(0, 1) == -5.0);
  CHECK(g.x(3, 0) == 10.0);
  CHECK(g.x(3, 1) == 5.0);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(g.y[i] == toy_surface(g.x(i, 0), g.x(i, 1)));

  CHECK(evaluation_grid(DomainSpec{}).x.rows() == 2500);

  dom.grid_resolution = {9, 3};
  const EvaluationSet odd = evaluation_grid(dom);
  for (Eigen::Index i = 0; i < odd.x.rows(); ++i) {
    if (odd.x(i, 1) == 0.0) CHECK(odd.y[i] == 0.0);
  }
  const EvaluationSet right = restrict_above(odd, 5.0);
  CHECK(right.x.rows() == 12);
  CHECK(right.x.col(0).minCoeff() > 5.0);
}

TEST_CASE("csv parsing") {
  const Dataset d = parse("x1,x2,y\n0,1,2\n0.5,-1,3e-2\n1,0,-4\n");
  CHECK(d.size() == 3);
  CHECK(d.x(1, 1) == -1.0);
  CHECK(d.y[1] == 0.03);
  CHECK_FALSE(d.coverage_pct.has_value());
  CHECK(d.provenance == Provenance::Csv);

  CHECK(parse("x1,x2,y\r\n1,2,3\r\n4,5,6\r\n").size() == 2);
  CHECK(parse("\xEF\xBB\xBFx1,x2,y\n1,2,3\n4,5,6").size() == 2);
  CHECK(parse("x1,x2,y\n1,2,3\n\n4,5,6\n\n").size() == 2);
}

TEST_CASE("csv errors name the line") {
  CHECK(error_line("x1,x2,y\n0,1,2\nfoo,1,2\n") == 3);
  CHECK(error_line("x1,x2,y\n0,1,2\n1,2\n") == 3);
  CHECK(error_line("x1,x2,y\n0,1,2\n1,2,3,4\n") == 3);
  CHECK(error_line("a,b,c\n0,1,2\n1,2,3\n") == 1);
  CHECK(error_line("") == 1);
  CHECK(error_line("x1,x2,y\n1,nan,2\n1,2,3\n") == 2);
  CHECK(error_line("x1,x2,y\n1,2,3\n") != 0);
  try {
    parse("x1,x2,y\n0,1,2\n0,1,oops\n");
  } catch (const DataFormatError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("csv files") {
  CHECK_THROWS_AS(load_csv(temp_path("does_not_exist.csv")), IoError);

  const Dataset d = sample_coverage(DomainSpec{}, 20, 4);
  const auto path = temp_path("roundtrip.csv");
  write_csv(d, path);
  const Dataset back = load_csv(path);
  CHECK(back.x == d.x);
  CHECK(back.y == d.y);
  std::filesystem::remove(path);

  const auto bad = temp_path("bad.csv");
  std::ofstream(bad) << "x1,x2,y\n1,2,3\n4,x,6\n";
  try {
    load_csv(bad);
    FAIL("expected DataFormatError");
  } catch (const DataFormatError& e) {
    CHECK(e.line() == 3);
  }
  std::filesystem::remove(bad);
}

TEST_CASE("external data coverage") {
  Dataset d;
  d.x = Inputs(11, 2);
  d.y = Vector(11);
  for (int i = 0; i <= 10; ++i) {
    d.x(i, 0) = 10 - i;
    d.x(i, 1) = 0.0;
    d.y[i] = i;
  }
  CHECK(empirical_band(d, 30).hi == doctest::Approx(3.0).epsilon(1e-15));
  const Dataset sel = select_coverage(d, 30);
  CHECK(sel.size() == 4);
  CHECK(sel.coverage_pct == 30);
  CHECK(select_coverage(d, 100).size() == 11);

  const Dataset p = permute_rows(d, 5);
  CHECK(p.size() == d.size());
  CHECK(p.y.sum() == d.y.sum());
  CHECK(p.y != d.y);
  CHECK(permute_rows(d, 5).y == p.y);
  for (Eigen::Index i = 0; i < p.x.rows(); ++i) {
    CHECK(p.x(i, 0) == d.x(static_cast<Eigen::Index>(p.y[i]), 0));
  }
}
