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

#include "greygp/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace greygp {

namespace {

using nlohmann::json;

// JSON has no infinity; failed runs serialize their NMSE as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

template <class T>
std::string csv_optional(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return csv_number(*v);
  } else {
    return std::to_string(*v);
  }
}

bool has_emissions(const SweepReport& report) {
  for (const auto& c : report.cells) {
    if (c.emissions) return true;
  }
  return false;
}

void write_file(const std::filesystem::path& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  writer(out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

json to_json(const EmissionsEstimate& e) {
  const PowerModel& p = e.power_model;
  return {{"runtime_s", e.runtime_s},
          {"power_w", e.power_w},
          {"energy_kwh", e.energy_kwh},
          {"gco2e", e.gco2e},
          {"power_model",
           {{"cpu_tdp_w", p.cpu_tdp_w},
            {"cpu_load_factor", p.cpu_load_factor},
            {"ram_gb", p.ram_gb},
            {"ram_w_per_gb", p.ram_w_per_gb},
            {"pue", p.pue},
            {"carbon_intensity", p.carbon_intensity}}}};
}

json to_json(const RunRecord& run) {
  json params = json::object();
  const auto names = model_parameter_names(run.model);
  const auto values = model_parameters(run.model);
  for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = finite_or_null(values[i]);
  json j = {{"start", run.start},
            {"repeat", run.repeat},
            {"ok", run.ok},
            {"nmse", finite_or_null(run.nmse)},
            {"runtime_s", run.runtime_s},
            {"final_lml", finite_or_null(run.final_lml)},
            {"n_train", run.n_train},
            {"jittered_iterations", run.jittered_iterations},
            {"hyperparameters", params}};
  if (!run.diagnostic.empty()) j["diagnostic"] = run.diagnostic;
  return j;
}

json to_json(const CellRecord& cell) {
  json runs = json::array();
  for (const auto& r : cell.runs) runs.push_back(to_json(r));
  json j = {{"model", cell.model},
            {"coverage", cell.coverage},
            {"n_train", cell.n_train},
            {"free_params", cell.free_params},
            {"passed", cell.passed},
            {"max_nmse", finite_or_null(cell.max_nmse)},
            {"total_runtime_s", cell.total_runtime_s},
            {"runs", runs}};
  if (cell.emissions) j["emissions"] = to_json(*cell.emissions);
  return j;
}

json to_json(const SweepReport& report) {
  const SweepMetadata& m = report.metadata;
  json meta = {{"seed", m.seed},
               {"config_hash", m.config_hash},
               {"mode", to_string(m.mode)},
               {"sequential", m.sequential},
               {"threshold", m.threshold},
               {"nmse_region", to_string(m.region)},
               {"resample_per_repeat", m.resample_per_repeat},
               {"iterations", m.iterations},
               {"starts", m.starts},
               {"repeats", m.repeats}};
  json models = json::array();
  for (const auto& s : report.models) {
    json j = {{"model", s.model}, {"free_params", s.free_params}};
    j["threshold_coverage"] = s.threshold_coverage ? json(*s.threshold_coverage) : json(nullptr);
    j["delta_coverage_pct"] = s.delta_coverage_pct ? json(*s.delta_coverage_pct) : json(nullptr);
    j["threshold_runtime_s"] =
        s.threshold_runtime_s ? json(*s.threshold_runtime_s) : json(nullptr);
    if (s.emissions) j["emissions"] = to_json(*s.emissions);
    if (s.delta_emissions_pct) j["delta_emissions_pct"] = *s.delta_emissions_pct;
    models.push_back(j);
  }
  json cells = json::array();
  for (const auto& c : report.cells) cells.push_back(to_json(c));
  return {{"metadata", meta}, {"models", models}, {"cells", cells}};
}

void write_report_json(const SweepReport& report, std::ostream& out) {
  out << to_json(report).dump(2) << '\n';
}

void write_summary_csv(const SweepReport& report, std::ostream& out) {
  const bool emissions = has_emissions(report);
  out << "model,free_params,threshold_coverage,delta_coverage_pct";
  if (emissions) out << ",runtime_s,energy_kwh,gco2e,delta_emissions_pct";
  out << '\n';
  for (const auto& s : report.models) {
    out << s.model << ',' << s.free_params << ',' << csv_optional(s.threshold_coverage) << ','
        << csv_optional(s.delta_coverage_pct);
    if (emissions) {
      out << ',' << csv_optional(s.threshold_runtime_s) << ','
          << (s.emissions ? csv_number(s.emissions->energy_kwh) : "") << ','
          << (s.emissions ? csv_number(s.emissions->gco2e) : "") << ','
          << csv_optional(s.delta_emissions_pct);
    }
    out << '\n';
  }
}

void write_curves_csv(const SweepReport& report, std::ostream& out) {
  out << "model,coverage,run,nmse,runtime_s\n";
  for (const auto& c : report.cells) {
    for (std::size_t i = 0; i < c.runs.size(); ++i) {
      out << c.model << ',' << c.coverage << ',' << i << ',' << csv_number(c.runs[i].nmse) << ','
          << csv_number(c.runs[i].runtime_s) << '\n';
    }
  }
}

void write_reports(const SweepReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  write_file(dir / "report.json", [&](std::ostream& o) { write_report_json(report, o); });
  write_file(dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(report, o); });
  write_file(dir / "curves.csv", [&](std::ostream& o) { write_curves_csv(report, o); });
}

void print_summary(const SweepReport& report, std::ostream& out) {
  const bool emissions = has_emissions(report);
  out << std::left << std::setw(10) << "model" << std::setw(4) << "H" << std::setw(12)
      << "coverage%" << std::setw(12) << "delta%";
  if (emissions) out << std::setw(14) << "gCO2e" << std::setw(12) << "delta%";
  out << '\n';
  for (const auto& s : report.models) {
    out << std::setw(10) << s.model << std::setw(4) << s.free_params << std::setw(12)
        << (s.threshold_coverage ? std::to_string(*s.threshold_coverage) : "none")
        << std::setw(12) << (s.delta_coverage_pct ? csv_number(*s.delta_coverage_pct) : "-");
    if (emissions) {
      out << std::setw(14) << (s.emissions ? csv_number(s.emissions->gco2e) : "-")
          << std::setw(12) << (s.delta_emissions_pct ? csv_number(*s.delta_emissions_pct) : "-");
    }
    out << '\n';
  }
}

}  // namespace greygp
