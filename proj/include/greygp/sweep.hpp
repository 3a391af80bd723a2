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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greygp/carbon.hpp"
#include "greygp/datasets.hpp"
#include "greygp/training.hpp"

namespace greygp {

/// The three study presets, in baseline-first order.
std::vector<std::string> preset_names();

/// Default parameter specs for an arbitrary model: positive parameters free,
/// mean unconstrained, start points per `init`.
ModelTemplate default_template(std::string name, GPModel model, const InitRanges& init);

/// Black-1: constant mean + SE over (x1, x2).
/// Grey-1: constant mean + SE(x1, x2) * Periodic(x1), period within +-10% of
///         `true_period`.
/// Grey-2: as Grey-1 with the period fixed at `true_period`.
/// Throws std::invalid_argument for unknown names.
ModelTemplate make_preset(const std::string& name, const InitRanges& init = {},
                          double true_period = kToyPeriod);

enum class Mode { kMeasured, kFast };
enum class NmseRegion { kFull, kUncovered };

std::string to_string(Mode mode);
std::string to_string(NmseRegion region);

struct SweepOptions {
  double threshold = 10.0;
  Mode mode = Mode::kMeasured;
  NmseRegion region = NmseRegion::kFull;
  bool resample_per_repeat = true;
  std::vector<int> coverages{10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
};

/// Where training and evaluation data come from: the synthetic surface over
/// a domain, or an external dataset banded on its own x1 range.
class DataSource {
 public:
  static DataSource toy(DomainSpec domain);
  static DataSource external(Dataset data);

  /// Training set for one repeat of a coverage cell.
  Dataset training(int coverage_pct, int repeat, std::uint64_t seed, bool resample) const;
  /// NMSE scoring points for a coverage cell.
  EvaluationSet evaluation(int coverage_pct, NmseRegion region) const;

  bool is_toy() const { return domain_.has_value(); }
  const DomainSpec* domain() const { return domain_ ? &*domain_ : nullptr; }

 private:
  std::optional<DomainSpec> domain_;
  std::optional<Dataset> external_;
  std::optional<EvaluationSet> full_eval_;
};

struct CellRecord {
  std::string model;
  int coverage = 0;
  std::size_t n_train = 0;
  std::size_t free_params = 0;
  std::vector<RunRecord> runs;
  double total_runtime_s = 0.0;
  std::optional<EmissionsEstimate> emissions;
  double max_nmse = 0.0;
  bool passed = false;
};

/// A cell passes only when all `expected_runs` runs finished and every NMSE
/// is at or below the threshold. Failed runs carry an infinite NMSE.
bool cell_passes(std::span<const RunRecord> runs, int expected_runs, double threshold);

/// All starts x repeats runs of one (model, coverage) cell, sequentially.
/// Passes iff every NMSE is at most options.threshold. When `stop_on_failure`
/// is set the cell stops at its first failing run.
CellRecord run_cell(const ModelTemplate& preset, int coverage_pct, const DataSource& source,
                    const TrainConfig& config, const SweepOptions& options,
                    const std::optional<PowerModel>& power = std::nullopt,
                    bool stop_on_failure = false);

/// Lowest coverage in options.coverages whose cell passes, scanning upwards.
/// Failing cells are abandoned at their first failing run.
std::optional<int> find_threshold(const ModelTemplate& preset, const DataSource& source,
                                  const TrainConfig& config, const SweepOptions& options,
                                  std::vector<CellRecord>* cells = nullptr);

/// 100 * (value - baseline) / baseline.
double delta_pct(double value, double baseline);

struct ModelSummary {
  std::string model;
  std::size_t free_params = 0;
  std::optional<int> threshold_coverage;
  std::optional<double> delta_coverage_pct;
  std::optional<double> threshold_runtime_s;
  std::optional<EmissionsEstimate> emissions;
  std::optional<double> delta_emissions_pct;
};

struct SweepMetadata {
  std::uint64_t seed = 0;
  std::string config_hash;
  Mode mode = Mode::kMeasured;
  bool sequential = true;
  double threshold = 10.0;
  NmseRegion region = NmseRegion::kFull;
  bool resample_per_repeat = true;
  int iterations = 0;
  int starts = 0;
  int repeats = 0;
};

struct SweepReport {
  SweepMetadata metadata;
  std::vector<CellRecord> cells;  // model-major, coverage ascending
  std::vector<ModelSummary> models;

  const CellRecord* cell(const std::string& model, int coverage) const;
};

/// Every preset at every coverage. The first preset is the delta baseline.
/// Measured mode runs cells one after another and attaches emissions; fast
/// mode runs cells concurrently and leaves emissions empty.
SweepReport full_sweep(const std::vector<ModelTemplate>& presets, const DataSource& source,
                       const TrainConfig& config, const SweepOptions& options,
                       const std::optional<PowerModel>& power, std::string config_hash = {});

/// Least-squares slope of log(times) against log(sizes). Needs at least four
/// distinct sizes spanning a factor of four and positive times.
double loglog_slope(std::span<const double> sizes, std::span<const double> times);

struct ComplexityProbe {
  std::vector<double> sizes;
  std::vector<double> runtimes_s;
  double exponent = 0.0;
};

/// Times one fit per size on points drawn over the whole domain and fits the
/// runtime scaling exponent.
ComplexityProbe complexity_probe(const ModelTemplate& preset, const DomainSpec& domain,
                                 const std::vector<int>& sizes, const TrainConfig& config);

}  // namespace greygp
