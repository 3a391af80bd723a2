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

// greygp command-line driver.
//
//   greygp gen-data  --coverage 20 --out train.csv
//   greygp fit       --preset Grey-2 --coverage 20
//   greygp sweep     --config configs/toy_standard.json
//   greygp emissions --runtime 3600 --tdp 65 --ram-gb 32 --intensity 475
//
// Exit codes: 0 success, 1 usage/config error, 2 numerical failure, 3 I/O.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "greygp/config.hpp"
#include "greygp/report.hpp"

namespace {

using greygp::RunConfig;

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::optional<double> threshold;
  std::vector<std::string> presets;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_out = true) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Override the config seed");
  if (with_out) cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--mode", o.mode, "measured | fast")
      ->check(CLI::IsMember({"measured", "fast"}));
  cmd->add_option("--threshold", o.threshold, "NMSE pass threshold");
}

RunConfig load(const CommonOptions& o) {
  RunConfig c = o.config_path.empty() ? greygp::default_config()
                                      : greygp::load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.mode) c.mode = *o.mode == "fast" ? greygp::Mode::kFast : greygp::Mode::kMeasured;
  if (o.threshold) {
    if (!(*o.threshold > 0.0)) throw greygp::ConfigError("--threshold must be positive");
    c.threshold = *o.threshold;
  }
  return c;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path);
  if (!out) throw greygp::IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw greygp::IoError("failed writing '" + path.string() + "'");
}

int cmd_gen_data(const CommonOptions& common, int coverage, int repeat, const std::string& out) {
  const RunConfig c = load(common);
  if (!greygp::is_valid_coverage(coverage)) {
    std::cerr << "error: --coverage must be one of 10, 20, ..., 100 (got " << coverage << ")\n";
    return kUsage;
  }
  const auto source = greygp::DataSource::toy(c.domain);
  const greygp::Dataset data = source.training(coverage, repeat, c.seed, c.resample_per_repeat);
  greygp::write_csv(data, std::filesystem::path(out));
  const auto band = greygp::coverage_band(c.domain.x1_range[0], c.domain.x1_range[1], coverage);
  std::cout << "wrote " << out << ": N=" << data.size() << " coverage=" << coverage
            << "% x1 in [" << band.lo << ", " << band.hi << "]\n";
  return kOk;
}

int cmd_fit(const CommonOptions& common, const std::string& preset_name,
            const std::optional<std::string>& data_path, std::optional<int> coverage, int start,
            int repeat, const std::optional<std::string>& trace_path) {
  RunConfig c = load(common);
  if (data_path) c.data_csv = *data_path;
  const int cov = coverage.value_or(c.data_csv ? 100 : 20);
  if (!greygp::is_valid_coverage(cov)) {
    std::cerr << "error: --coverage must be one of 10, 20, ..., 100 (got " << cov << ")\n";
    return kUsage;
  }
  greygp::ModelTemplate preset;
  bool found = false;
  for (const auto& p : c.presets) {
    if (p.name == preset_name) {
      preset = greygp::resolve_preset(p, c);
      found = true;
    }
  }
  if (!found) preset = greygp::resolve_preset({preset_name, std::nullopt}, c);

  const greygp::TrainConfig train = c.train_config();
  const auto source = greygp::make_data_source(c);
  const greygp::Dataset data = source.training(cov, repeat, c.seed, c.resample_per_repeat);
  const auto eval = source.evaluation(cov, c.region);
  const auto start_point = greygp::draw_start_point(preset, data, start, c.seed);
  const greygp::FitResult f = greygp::fit(preset, data, start_point, train);

  nlohmann::json summary = {{"preset", preset.name},
                            {"free_params", preset.num_free()},
                            {"coverage", cov},
                            {"n_train", data.size()},
                            {"start", start},
                            {"repeat", repeat},
                            {"ok", f.ok},
                            {"runtime_s", f.runtime_s},
                            {"iterations", train.iterations},
                            {"config_hash", greygp::config_hash(c)}};
  if (!f.diagnostic.empty()) summary["diagnostic"] = f.diagnostic;
  nlohmann::json params = nlohmann::json::object();
  const auto names = greygp::model_parameter_names(f.model);
  const auto values = greygp::model_parameters(f.model);
  for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = values[i];
  summary["hyperparameters"] = params;

  if (f.ok) {
    summary["final_lml"] = f.final_lml;
    const auto pred = greygp::Posterior(f.model, data).predict(eval.x);
    summary["nmse"] = greygp::nmse(greygp::as_span(pred.mean), greygp::as_span(eval.y));
  }
  if (c.power) summary["emissions"] = greygp::to_json(greygp::estimate(f.runtime_s, *c.power));

  if (trace_path) {
    std::ofstream out(*trace_path);
    if (!out) throw greygp::IoError("cannot open '" + *trace_path + "' for writing");
    greygp::write_trace_csv(f.trace, out);
  }
  write_json(summary, c.out / "fit.json");
  std::cout << summary.dump(2) << '\n';
  return f.ok ? kOk : kNumerical;
}

int cmd_sweep(const CommonOptions& common) {
  const RunConfig c = load(common);
  std::vector<greygp::ModelTemplate> presets = greygp::resolve_presets(c);
  if (!common.presets.empty()) {
    std::vector<greygp::ModelTemplate> selected;
    for (const auto& name : common.presets) {
      auto it = std::find_if(presets.begin(), presets.end(),
                             [&](const auto& p) { return p.name == name; });
      selected.push_back(it != presets.end()
                             ? *it
                             : greygp::resolve_preset({name, std::nullopt}, c));
    }
    presets = std::move(selected);
  }
  const std::string hash = greygp::config_hash(c);
  std::cout << "config hash " << hash << ", mode " << greygp::to_string(c.mode) << ", "
            << presets.size() << " presets x " << c.coverages.size() << " coverages x "
            << c.train.runs() << " runs\n";
  const auto report = greygp::full_sweep(presets, greygp::make_data_source(c), c.train_config(),
                                         c.sweep_options(), c.power, hash);
  greygp::write_reports(report, c.out);
  greygp::print_summary(report, std::cout);
  std::cout << "reports written to " << c.out.string() << '\n';
  return kOk;
}

struct PowerFlags {
  std::optional<double> tdp, load, ram_gb, ram_w_per_gb, pue, intensity;
};

int cmd_emissions(const CommonOptions& common, double runtime_s, const PowerFlags& f) {
  const RunConfig c = load(common);
  greygp::PowerModel p = c.power.value_or(greygp::PowerModel{});
  if (f.tdp) p.cpu_tdp_w = *f.tdp;
  if (f.load) p.cpu_load_factor = *f.load;
  if (f.ram_gb) p.ram_gb = *f.ram_gb;
  if (f.ram_w_per_gb) p.ram_w_per_gb = *f.ram_w_per_gb;
  if (f.pue) p.pue = *f.pue;
  if (f.intensity) p.carbon_intensity = *f.intensity;
  if (!c.power && !f.intensity) {
    std::cerr << "error: carbon intensity is required (--intensity or power.carbon_intensity)\n";
    return kUsage;
  }
  std::cout << greygp::to_json(greygp::estimate(runtime_s, p)).dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact GP regression with physics-informed kernels, coverage sweeps and "
               "runtime-based emissions estimates"};
  app.require_subcommand(1);

  CommonOptions gen_opts, fit_opts, sweep_opts, em_opts;

  auto* gen = app.add_subcommand("gen-data", "Write a coverage-banded training set as CSV");
  add_common(gen, gen_opts, false);
  int gen_coverage = 0;
  int gen_repeat = 0;
  std::string gen_out;
  gen->add_option("--coverage", gen_coverage, "Coverage percentage (10, 20, ..., 100)")
      ->required();
  gen->add_option("--repeat", gen_repeat, "Repeat index (selects the data stream)");
  gen->add_option("--out", gen_out, "Output CSV path")->required();

  auto* fit = app.add_subcommand("fit", "Train one model and report hyperparameters and NMSE");
  add_common(fit, fit_opts);
  std::string fit_preset;
  std::optional<std::string> fit_data, fit_trace;
  std::optional<int> fit_coverage;
  int fit_start = 0;
  int fit_repeat = 0;
  fit->add_option("--preset", fit_preset, "Black-1, Grey-1, Grey-2 or a custom preset name")
      ->required();
  fit->add_option("--data", fit_data, "x1,x2,y CSV file instead of the synthetic surface");
  fit->add_option("--coverage", fit_coverage, "Coverage percentage (default 20, or 100 with --data)");
  fit->add_option("--start", fit_start, "Start-point index");
  fit->add_option("--repeat", fit_repeat, "Repeat index");
  fit->add_option("--trace", fit_trace, "Write the optimization trace as CSV");

  auto* sweep = app.add_subcommand("sweep", "Run every preset at every coverage and write reports");
  add_common(sweep, sweep_opts);
  sweep->add_option("--preset", sweep_opts.presets, "Restrict to these presets (repeatable)");

  auto* em = app.add_subcommand("emissions", "Convert a runtime into energy and gCO2e");
  add_common(em, em_opts, false);
  double runtime_s = 0.0;
  PowerFlags flags;
  em->add_option("--runtime", runtime_s, "Runtime in seconds")->required();
  em->add_option("--tdp", flags.tdp, "CPU thermal design power (W)");
  em->add_option("--load", flags.load, "CPU load factor in (0, 1]");
  em->add_option("--ram-gb", flags.ram_gb, "Installed RAM (GB)");
  em->add_option("--ram-w-per-gb", flags.ram_w_per_gb, "RAM power per GB (W)");
  em->add_option("--pue", flags.pue, "Power usage effectiveness");
  em->add_option("--intensity", flags.intensity, "Carbon intensity (gCO2e/kWh)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_opts, gen_coverage, gen_repeat, gen_out);
    if (fit->parsed()) {
      return cmd_fit(fit_opts, fit_preset, fit_data, fit_coverage, fit_start, fit_repeat,
                     fit_trace);
    }
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (em->parsed()) return cmd_emissions(em_opts, runtime_s, flags);
  } catch (const greygp::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const greygp::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const greygp::DataFormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kUsage;
  } catch (const greygp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
