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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "greygp/carbon.hpp"
#include "greygp/sweep.hpp"

namespace greygp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json kernel_to_json(const KernelSpec& spec);
/// Keys: kind, lengthscale, variance, period, active_dims, children.
KernelSpec kernel_from_json(const nlohmann::json& j);

/// A built-in preset by name, or a custom model definition.
struct PresetConfig {
  std::string name;
  std::optional<nlohmann::json> custom;
};

struct RunConfig {
  DomainSpec domain;
  TrainConfig train;
  std::optional<PowerModel> power;
  std::vector<PresetConfig> presets;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  double threshold = 10.0;
  Mode mode = Mode::kMeasured;
  NmseRegion region = NmseRegion::kFull;
  bool resample_per_repeat = true;
  std::vector<int> coverages{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::optional<std::filesystem::path> data_csv;
  double true_period = kToyPeriod;

  SweepOptions sweep_options() const;
  /// Train config with the run seed applied.
  TrainConfig train_config() const;
};

/// Defaults matching the standard synthetic study (no power model).
RunConfig default_config();

/// Parses a config document; unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical form with every default filled in.
nlohmann::json to_json(const RunConfig& config);

/// 16 hex digits over every field that affects results (the output
/// directory is excluded).
std::string config_hash(const RunConfig& config);

std::vector<ModelTemplate> resolve_presets(const RunConfig& config);
ModelTemplate resolve_preset(const PresetConfig& preset, const RunConfig& config);

DataSource make_data_source(const RunConfig& config);

}  // namespace greygp
