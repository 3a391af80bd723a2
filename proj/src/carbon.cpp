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

#include "greygp/carbon.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace greygp {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument("power model: " + message);
}

}  // namespace

void validate(const PowerModel& m) {
  require(std::isfinite(m.cpu_tdp_w) && m.cpu_tdp_w > 0.0, "cpu_tdp_w must be positive");
  require(std::isfinite(m.cpu_load_factor) && m.cpu_load_factor > 0.0 && m.cpu_load_factor <= 1.0,
          "cpu_load_factor must lie in (0, 1]");
  require(std::isfinite(m.ram_gb) && m.ram_gb >= 0.0, "ram_gb must be non-negative");
  require(std::isfinite(m.ram_w_per_gb) && m.ram_w_per_gb >= 0.0,
          "ram_w_per_gb must be non-negative");
  require(std::isfinite(m.pue) && m.pue >= 1.0, "pue must be at least 1");
  require(std::isfinite(m.carbon_intensity) && m.carbon_intensity >= 0.0,
          "carbon_intensity must be non-negative");
}

double power_draw_w(const PowerModel& m) {
  return m.cpu_tdp_w * m.cpu_load_factor + m.ram_gb * m.ram_w_per_gb;
}

EmissionsEstimate estimate(double runtime_s, const PowerModel& model) {
  if (!std::isfinite(runtime_s) || runtime_s < 0.0) {
    throw std::invalid_argument("estimate: runtime must be a non-negative finite number");
  }
  validate(model);
  EmissionsEstimate e;
  e.runtime_s = runtime_s;
  e.power_w = power_draw_w(model);
  e.energy_kwh = e.power_w * runtime_s / 3.6e6;
  e.gco2e = e.energy_kwh * model.carbon_intensity * model.pue;
  e.power_model = model;
  return e;
}

}  // namespace greygp
