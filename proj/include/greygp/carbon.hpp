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

#pragma once

#include <chrono>
#include <type_traits>
#include <utility>

namespace greygp {

/// Constant-power host description. CPU draw is its TDP scaled by a fixed
/// load factor; RAM draw is proportional to installed memory.
struct PowerModel {
  double cpu_tdp_w = 65.0;
  double cpu_load_factor = 0.5;
  double ram_gb = 0.0;
  double ram_w_per_gb = 0.375;
  double pue = 1.0;
  double carbon_intensity = 0.0;  // gCO2e per kWh

  friend bool operator==(const PowerModel&, const PowerModel&) = default;
};

void validate(const PowerModel& model);

/// Watts drawn while a task runs.
double power_draw_w(const PowerModel& model);

struct EmissionsEstimate {
  double runtime_s = 0.0;
  double power_w = 0.0;
  double energy_kwh = 0.0;
  double gco2e = 0.0;
  PowerModel power_model;
};

/// energy = power * runtime; gCO2e = energy * carbon_intensity * pue.
/// Throws std::invalid_argument for negative or non-finite runtime.
EmissionsEstimate estimate(double runtime_s, const PowerModel& model);

template <class T>
struct Timed {
  T value;
  double runtime_s;
};

/// Runs `task` and measures its wall-clock duration on the steady clock.
/// Returns the elapsed seconds for void tasks, Timed<T> otherwise.
template <class F>
auto timed(F&& task) {
  using Clock = std::chrono::steady_clock;
  using Result = std::invoke_result_t<F>;
  const auto start = Clock::now();
  if constexpr (std::is_void_v<Result>) {
    std::forward<F>(task)();
    return std::chrono::duration<double>(Clock::now() - start).count();
  } else {
    Result value = std::forward<F>(task)();
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    return Timed<Result>{std::move(value), elapsed};
  }
}

}  // namespace greygp
