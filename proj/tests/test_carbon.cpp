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

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "greygp/carbon.hpp"
#include "oracles.hpp"

using namespace greygp;
using greygp::testing::rel_err;

namespace {

PowerModel workstation() {
  PowerModel m;
  m.cpu_tdp_w = 65.0;
  m.cpu_load_factor = 0.5;
  m.ram_gb = 32.0;
  m.ram_w_per_gb = 0.375;
  m.pue = 1.0;
  m.carbon_intensity = 475.0;
  return m;
}

}  // namespace

TEST_CASE("one hour on the reference workstation") {
  const EmissionsEstimate e = estimate(3600.0, workstation());
  CHECK(e.power_w == 44.5);
  CHECK(rel_err(e.energy_kwh, 0.0445) < 1e-12);
  CHECK(rel_err(e.gco2e, 21.1375) < 1e-9);
  CHECK(e.power_model == workstation());
  CHECK(e.runtime_s == 3600.0);
}

TEST_CASE("zero runtime emits nothing") {
  const EmissionsEstimate e = estimate(0.0, workstation());
  CHECK(e.energy_kwh == 0.0);
  CHECK(e.gco2e == 0.0);
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(estimate(-1.0, workstation()), std::invalid_argument);
  CHECK_THROWS_AS(estimate(std::numeric_limits<double>::infinity(), workstation()),
                  std::invalid_argument);
  PowerModel m = workstation();
  m.pue = 0.9;
  CHECK_THROWS_AS(validate(m), std::invalid_argument);
  m = workstation();
  m.cpu_load_factor = 1.5;
  CHECK_THROWS_AS(validate(m), std::invalid_argument);
  m = workstation();
  m.carbon_intensity = -1.0;
  CHECK_THROWS_AS(estimate(1.0, m), std::invalid_argument);
}

TEST_CASE("emissions scale linearly with runtime") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(0.0, 1e5);
  for (int i = 0; i < 200; ++i) {
    const double s = t(rng);
    const auto a = estimate(s, workstation()), b = estimate(2.0 * s, workstation());
    CHECK(b.energy_kwh == 2.0 * a.energy_kwh);
    CHECK(b.gco2e == 2.0 * a.gco2e);
  }
}

TEST_CASE("emissions ratio equals runtime ratio under a shared power model") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> t(1.0, 1e4);
  for (int i = 0; i < 200; ++i) {
    const double s1 = t(rng), s2 = t(rng);
    CHECK(rel_err(estimate(s1, workstation()).gco2e / estimate(s2, workstation()).gco2e, s1 / s2) <
          1e-12);
  }
}

TEST_CASE("emissions grow with every power model field") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> bump(1.01, 2.0);
  const double base = estimate(1000.0, workstation()).gco2e;
  for (int i = 0; i < 50; ++i) {
    const double f = bump(rng);
    PowerModel m = workstation();
    m.cpu_tdp_w *= f;
    CHECK(estimate(1000.0, m).gco2e > base);
    m = workstation();
    m.cpu_load_factor = std::min(1.0, m.cpu_load_factor * f);
    CHECK(estimate(1000.0, m).gco2e > base);
    m = workstation();
    m.ram_gb *= f;
    CHECK(estimate(1000.0, m).gco2e > base);
    m = workstation();
    m.ram_w_per_gb *= f;
    CHECK(estimate(1000.0, m).gco2e > base);
    m = workstation();
    m.pue *= f;
    CHECK(estimate(1000.0, m).gco2e > base);
    m = workstation();
    m.carbon_intensity *= f;
    CHECK(estimate(1000.0, m).gco2e > base);
  }
}

TEST_CASE("timing") {
  const double idle = timed([] {});
  CHECK(idle >= 0.0);
  CHECK(idle < 0.01);

  const double slept = timed([] { std::this_thread::sleep_for(std::chrono::milliseconds(100)); });
  CHECK(slept >= 0.095);
  CHECK(slept < 0.5);

  const auto r = timed([] { return std::string("done"); });
  CHECK(r.value == "done");
  CHECK(r.runtime_s >= 0.0);

  CHECK_THROWS_AS(timed([]() -> int { throw std::runtime_error("boom"); }), std::runtime_error);
}
