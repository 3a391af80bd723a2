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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "greygp/datasets.hpp"
#include "greygp/rng.hpp"
#include "greygp/sweep.hpp"
#include "greygp/training.hpp"
#include "oracles.hpp"

using namespace greygp;
using greygp::testing::central_difference;
using greygp::testing::rel_err;

namespace {

ParamSpec spec(Constraint c) { return {"p", c, {}}; }

TrainConfig quick(int iterations = 40) {
  TrainConfig c;
  c.iterations = iterations;
  c.seed = 123;
  return c;
}

DomainSpec small_domain() {
  DomainSpec d;
  d.points_per_decile = 6;
  d.grid_resolution = {12, 12};
  return d;
}

// Targets drawn from the GP prior of `model` at random inputs.
Dataset prior_draw(const GPModel& model, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset d;
  d.x = greygp::testing::random_inputs(rng, n, 2, -3.0, 3.0);
  Matrix k = covariance_matrix(model.kernel, d.x);
  k.diagonal().array() += model.noise_variance;
  const Matrix l = k.llt().matrixL();
  std::normal_distribution<double> g;
  Vector z(n);
  for (int i = 0; i < n; ++i) z[i] = g(rng);
  d.y = (l * z).array() + model.mean;
  return d;
}

}  // namespace

TEST_CASE("constraint transforms") {
  CHECK(from_unconstrained(0.0, spec(Bounded{1.0, 3.0})) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(to_unconstrained(1.0, spec(FreePositive{})) == 0.0);
  CHECK(to_unconstrained(-2.5, spec(FreeReal{})) == -2.5);
  CHECK(from_unconstrained(17.0, spec(Fixed{1.25})) == 1.25);
  CHECK_THROWS_AS(to_unconstrained(4.0, spec(Bounded{1.0, 3.0})), std::invalid_argument);
  CHECK_THROWS_AS(to_unconstrained(-1.0, spec(FreePositive{})), std::invalid_argument);
  CHECK_THROWS_AS(to_unconstrained(std::numeric_limits<double>::infinity(), spec(FreeReal{})),
                  std::invalid_argument);

  // Saturated logistic stays inside the closed interval.
  for (double u : {-800.0, -40.0, 40.0, 800.0}) {
    const double v = from_unconstrained(u, spec(Bounded{0.5, 0.6}));
    CHECK(v >= 0.5);
    CHECK(v <= 0.6);
  }
}

TEST_CASE("transforms round-trip") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(1e-3, 1e3), real(-50, 50), in(1.1, 2.9);
  for (int t = 0; t < 500; ++t) {
    const double a = pos(rng), b = real(rng), c = in(rng);
    CHECK(rel_err(from_unconstrained(to_unconstrained(a, spec(FreePositive{})), spec(FreePositive{})), a) < 1e-12);
    CHECK(from_unconstrained(to_unconstrained(b, spec(FreeReal{})), spec(FreeReal{})) == b);
    const ParamSpec bd = spec(Bounded{1.0, 3.0});
    CHECK(rel_err(from_unconstrained(to_unconstrained(c, bd), bd), c) < 1e-12);
  }
}

TEST_CASE("transform derivatives match finite differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4, 4);
  for (const ParamSpec& s : {spec(FreePositive{}), spec(FreeReal{}), spec(Bounded{0.2, 5.0})}) {
    for (int t = 0; t < 50; ++t) {
      const double x = u(rng);
      const double fd = central_difference([&](double v) { return from_unconstrained(v, s); }, x, 1e-6);
      CHECK(rel_err(from_unconstrained_derivative(x, s), fd, 1e-8) < 1e-7);
    }
  }
}

TEST_CASE("preset constraints") {
  const double p = 1.3;
  const ModelTemplate g1 = make_preset("Grey-1", {}, p);
  const auto& period = g1.params[3];
  CHECK(period.name == "period1");
  REQUIRE(std::holds_alternative<Bounded>(period.constraint));
  CHECK(std::get<Bounded>(period.constraint).lo == doctest::Approx(0.9 * p).epsilon(1e-15));
  CHECK(std::get<Bounded>(period.constraint).hi == doctest::Approx(1.1 * p).epsilon(1e-15));

  const ModelTemplate g2 = make_preset("Grey-2", {}, p);
  REQUIRE(std::holds_alternative<Fixed>(g2.params[3].constraint));
  CHECK(std::get<Fixed>(g2.params[3].constraint).value == p);

  CHECK(make_preset("Black-1").num_free() == 4);
  CHECK(g1.num_free() == 6);
  CHECK(g2.num_free() == 5);
  CHECK(std::holds_alternative<FreeReal>(g2.params[4].constraint));
}

TEST_CASE("adam step") {
  TrainConfig c;
  c.learning_rate = 0.05;
  AdamState s(3);
  Vector g(3);
  g << 2.0, -0.001, 0.0;
  const Vector step = adam_step(s, g, 1, c);
  CHECK(step[0] == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(step[1] == doctest::Approx(-0.05).epsilon(1e-4));
  CHECK(step[2] == 0.0);

  AdamState s1(2), s2(2);
  Vector h(2);
  h << 0.3, -1.2;
  for (int t = 1; t <= 5; ++t) CHECK(adam_step(s1, h, t, c) == adam_step(s2, h, t, c));

  Vector bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  AdamState s3(2);
  CHECK_THROWS_AS(adam_step(s3, bad, 1, c), DivergedRun);
  CHECK_THROWS_AS(adam_step(s3, h, 0, c), std::invalid_argument);
}

TEST_CASE("training config validation") {
  TrainConfig c;
  CHECK(c.runs() == 9);
  CHECK_NOTHROW(validate(c));
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = {};
  c.iterations = 0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
  c = {};
  c.beta2 = 1.0;
  CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("start points") {
  const DomainSpec dom = small_domain();
  const Dataset d = sample_coverage(dom, 30, 5);
  for (const char* name : {"Black-1", "Grey-1", "Grey-2"}) {
    const ModelTemplate t = make_preset(name);
    const auto a = draw_start_point(t, d, 0, 9);
    CHECK(a == draw_start_point(t, d, 0, 9));
    CHECK(a != draw_start_point(t, d, 1, 9));
    REQUIRE(a.size() == t.params.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::isfinite(a[i]));
      CHECK_NOTHROW(to_unconstrained(a[i], t.params[i]));
    }
  }
  const ModelTemplate g2 = make_preset("Grey-2");
  CHECK(draw_start_point(g2, d, 2, 1)[3] == kToyPeriod);
}

TEST_CASE("fit runs the configured number of steps") {
  const Dataset d = sample_coverage(small_domain(), 40, 3);
  const ModelTemplate t = make_preset("Grey-2");
  const TrainConfig c = quick(25);
  const FitResult r = fit(t, d, draw_start_point(t, d, 0, c.seed), c);
  REQUIRE(r.ok);
  CHECK(r.trace.lml.size() == 25);
  CHECK(r.trace.params.size() == 25);
  CHECK(model_parameters(r.model).size() == 6);
  CHECK(r.trace.lml.back() <= r.final_lml + 1.0);
  CHECK(r.runtime_s > 0.0);

  std::ostringstream csv;
  write_trace_csv(r.trace, csv);
  const std::string text = csv.str();
  CHECK(text.rfind("iteration,lml,variance,lengthscale0,lengthscale1,period1,mean,noise\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 26);
}

TEST_CASE("fixed period never moves and bounded period stays in bounds") {
  const Dataset d = sample_coverage(small_domain(), 40, 4);
  const TrainConfig c = quick(60);

  const ModelTemplate g2 = make_preset("Grey-2");
  const FitResult r2 = fit(g2, d, draw_start_point(g2, d, 1, c.seed), c);
  REQUIRE(r2.ok);
  for (const auto& row : r2.trace.params) CHECK(row[3] == kToyPeriod);
  CHECK(r2.model.kernel.children[1].period == kToyPeriod);

  const ModelTemplate g1 = make_preset("Grey-1");
  const FitResult r1 = fit(g1, d, draw_start_point(g1, d, 1, c.seed), c);
  REQUIRE(r1.ok);
  for (const auto& row : r1.trace.params) {
    CHECK(row[3] >= 0.9 * kToyPeriod);
    CHECK(row[3] <= 1.1 * kToyPeriod);
  }
}

TEST_CASE("fitting is deterministic") {
  const Dataset d = sample_coverage(small_domain(), 30, 8);
  const ModelTemplate t = make_preset("Grey-1");
  const TrainConfig c = quick(30);
  const auto start = draw_start_point(t, d, 2, c.seed);
  const FitResult a = fit(t, d, start, c);
  const FitResult b = fit(t, d, start, c);
  CHECK(a.trace.lml == b.trace.lml);
  CHECK(a.trace.params == b.trace.params);
  CHECK(a.model == b.model);
}

TEST_CASE("starting at the generating hyperparameters does not lose likelihood") {
  const GPModel truth{0.2, KernelSpec::squared_exponential(1.2, {0, 1}, 1.5), 0.05};
  ModelTemplate t = make_preset("Black-1");
  t.model = truth;
  TrainConfig c = quick(300);
  c.learning_rate = 0.01;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset d = prior_draw(truth, 40, seed);
    const FitResult r = fit(t, d, model_parameters(truth), c);
    REQUIRE(r.ok);
    CHECK(r.final_lml >= r.trace.lml.front() - 1e-6);
  }
}

TEST_CASE("fit rejects malformed input") {
  const Dataset d = sample_coverage(small_domain(), 20, 1);
  const ModelTemplate t = make_preset("Black-1");
  const std::vector<double> short_start{1.0, 1.0};
  CHECK_THROWS_AS(fit(t, d, short_start, quick()), std::invalid_argument);
  auto start = draw_start_point(t, d, 0, 1);
  start[0] = -1.0;
  CHECK_THROWS_AS(fit(t, d, start, quick()), std::invalid_argument);
}

TEST_CASE("diverging learning rate marks the run failed") {
  const Dataset d = sample_coverage(small_domain(), 20, 1);
  const ModelTemplate t = make_preset("Black-1");
  TrainConfig c = quick(200);
  c.learning_rate = 1e4;
  const FitResult r = fit(t, d, draw_start_point(t, d, 0, 1), c);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("multi-start fit produces one record per start and repeat") {
  const DomainSpec dom = small_domain();
  const EvaluationSet eval = evaluation_grid(dom);
  const ModelTemplate t = make_preset("Grey-2");
  const TrainConfig c = quick(15);
  const DatasetProvider provider = [&](int r) {
    return sample_coverage(dom, 50, derive_seed(c.seed, {kDataStream, 50, static_cast<std::uint64_t>(r)}));
  };
  const auto recs = multi_start_fit(t, provider, eval, c);
  REQUIRE(recs.size() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(recs[i].repeat == i / 3);
    CHECK(recs[i].start == i % 3);
    CHECK(recs[i].ok);
    CHECK(std::isfinite(recs[i].nmse));
  }
  const auto again = multi_start_fit(t, provider, eval, c);
  for (int i = 0; i < 9; ++i) CHECK(again[i].nmse == recs[i].nmse);

  const auto fixed = multi_start_fit(t, provider(0), eval, c);
  CHECK(fixed.size() == 9);
}

TEST_CASE("constant evaluation targets fail the run instead of throwing") {
  const DomainSpec dom = small_domain();
  EvaluationSet eval = evaluation_grid(dom);
  eval.y.setConstant(1.0);
  const Dataset d = sample_coverage(dom, 30, 2);
  const RunRecord r = run_once(make_preset("Black-1"), d, 0, 0, eval, quick(5));
  CHECK_FALSE(r.ok);
  CHECK(std::isinf(r.nmse));
  CHECK(r.diagnostic.find("variance") != std::string::npos);
}
