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

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "greygp/sweep.hpp"

namespace greygp {

nlohmann::json to_json(const EmissionsEstimate& e);
nlohmann::json to_json(const RunRecord& run);
nlohmann::json to_json(const CellRecord& cell);
nlohmann::json to_json(const SweepReport& report);

/// report.json: metadata, per-model summaries, every cell and run.
void write_report_json(const SweepReport& report, std::ostream& out);
/// summary.csv: one row per model (threshold coverage, emissions, deltas).
/// Emission columns are omitted when no cell carries emissions.
void write_summary_csv(const SweepReport& report, std::ostream& out);
/// curves.csv: model, coverage, run, nmse, runtime_s.
void write_curves_csv(const SweepReport& report, std::ostream& out);

/// Writes the three report files into `dir`, creating it if needed.
void write_reports(const SweepReport& report, const std::filesystem::path& dir);

/// Human-readable summary table.
void print_summary(const SweepReport& report, std::ostream& out);

}  // namespace greygp
