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

#include "greygp/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "greygp/rng.hpp"

namespace greygp {

namespace {

void collect_leaves(const KernelSpec& node, std::vector<const KernelSpec*>& out) {
  if (node.kind == KernelKind::Product) {
    for (const auto& c : node.children) collect_leaves(c, out);
  } else {
    out.push_back(&node);
  }
}

InitDistribution log_uniform(const std::array<double, 2>& range, InitScale scale,
                             std::vector<std::size_t> dims = {}) {
  InitDistribution d;
  d.kind = InitDistribution::Kind::kLogUniform;
  d.lo = range[0];
  d.hi = range[1];
  d.scale = scale;
  d.dims = std::move(dims);
  return d;
}

ParamSpec& find_param(ModelTemplate& t, const std::string& name) {
  for (auto& p : t.params) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument(t.name + ": no parameter named '" + name + "'");
}

GPModel grey_model(double true_period) {
  GPModel m;
  m.kernel = KernelSpec::product(
      {KernelSpec::squared_exponential(1.0, {1}), KernelSpec::periodic(1.0, true_period, 0)},
      1.0);
  m.noise_variance = 1e-2;
  return m;
}

}  // namespace

std::vector<std::string> preset_names() { return {"Black-1", "Grey-1", "Grey-2"}; }

ModelTemplate default_template(std::string name, GPModel model, const InitRanges& init) {
  validate(model);
  ModelTemplate t;
  t.name = std::move(name);
  std::vector<const KernelSpec*> leaves;
  collect_leaves(model.kernel, leaves);
  const auto names = model_parameter_names(model);

  ParamSpec variance{names[0], FreePositive{},
                     log_uniform(init.variance, InitScale::kTargetVariance)};
  t.params.push_back(variance);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const KernelSpec& leaf = *leaves[i];
    ParamSpec p{names[1 + i], FreePositive{}, {}};
    if (leaf.kind == KernelKind::SquaredExponential) {
      p.init = log_uniform(init.lengthscale, InitScale::kInputSpread, leaf.active_dims);
    } else {
      // The periodic lengthscale divides a sine, so it has no input units.
      p.init = log_uniform(init.lengthscale, InitScale::kNone);
    }
    t.params.push_back(p);
  }
  for (std::size_t i = 1 + leaves.size(); i + 2 < names.size(); ++i) {
    // Free periods start from the period the model was built with.
    t.params.push_back({names[i], FreePositive{}, {}});
  }
  InitDistribution mean_init;
  mean_init.kind = InitDistribution::Kind::kTargetMeanSpread;
  t.params.push_back({"mean", FreeReal{}, mean_init});
  t.params.push_back({"noise", FreePositive{}, log_uniform(init.noise, InitScale::kTargetVariance)});
  t.model = std::move(model);
  validate(t);
  return t;
}

ModelTemplate make_preset(const std::string& name, const InitRanges& init, double true_period) {
  if (name == "Black-1") {
    GPModel m;
    m.kernel = KernelSpec::squared_exponential(1.0, {0, 1}, 1.0);
    return default_template(name, m, init);
  }
  if (name == "Grey-1") {
    ModelTemplate t = default_template(name, grey_model(true_period), init);
    ParamSpec& period = find_param(t, "period1");
    period.constraint = Bounded{0.9 * true_period, 1.1 * true_period};
    period.init.kind = InitDistribution::Kind::kWithinBounds;
    return t;
  }
  if (name == "Grey-2") {
    ModelTemplate t = default_template(name, grey_model(true_period), init);
    find_param(t, "period1").constraint = Fixed{true_period};
    return t;
  }
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown preset '" + name + "' (valid presets: " + valid + ")");
}

std::string to_string(Mode mode) { return mode == Mode::kMeasured ? "measured" : "fast"; }
std::string to_string(NmseRegion region) {
  return region == NmseRegion::kFull ? "full" : "uncovered";
}

DataSource DataSource::toy(DomainSpec domain) {
  validate(domain);
  DataSource s;
  s.full_eval_ = evaluation_grid(domain);
  s.domain_ = std::move(domain);
  return s;
}

DataSource DataSource::external(Dataset data) {
  validate(data);
  if (data.x.cols() != 2) throw std::invalid_argument("external data must have two inputs");
  DataSource s;
  s.full_eval_ = EvaluationSet{data.x, data.y};
  s.external_ = std::move(data);
  return s;
}

Dataset DataSource::training(int coverage_pct, int repeat, std::uint64_t seed,
                             bool resample) const {
  const auto shuffle_seed =
      derive_seed(seed, {kShuffleStream, static_cast<std::uint64_t>(coverage_pct),
                         static_cast<std::uint64_t>(repeat)});
  if (domain_) {
    const int stream = resample ? repeat : 0;
    Dataset d = sample_coverage(*domain_, coverage_pct,
                                derive_seed(seed, {kDataStream, static_cast<std::uint64_t>(stream)}));
    if (!resample && repeat > 0) d = permute_rows(d, shuffle_seed);
    return d;
  }
  Dataset d = select_coverage(*external_, coverage_pct);
  if (repeat > 0) d = permute_rows(d, shuffle_seed);
  return d;
}

EvaluationSet DataSource::evaluation(int coverage_pct, NmseRegion region) const {
  if (region == NmseRegion::kFull || coverage_pct == 100) return *full_eval_;
  const Band band = domain_ ? coverage_band(domain_->x1_range[0], domain_->x1_range[1], coverage_pct)
                            : empirical_band(*external_, coverage_pct);
  EvaluationSet out = restrict_above(*full_eval_, band.hi);
  if (out.y.size() < 2) return *full_eval_;
  return out;
}

bool cell_passes(std::span<const RunRecord> runs, int expected_runs, double threshold) {
  if (static_cast<int>(runs.size()) != expected_runs) return false;
  return std::all_of(runs.begin(), runs.end(), [&](const RunRecord& r) {
    return r.ok && r.nmse <= threshold;
  });
}

CellRecord run_cell(const ModelTemplate& preset, int coverage_pct, const DataSource& source,
                    const TrainConfig& config, const SweepOptions& options,
                    const std::optional<PowerModel>& power, bool stop_on_failure) {
  validate(config);
  if (!is_valid_coverage(coverage_pct)) {
    throw std::invalid_argument("invalid coverage " + std::to_string(coverage_pct));
  }
  CellRecord cell;
  cell.model = preset.name;
  cell.coverage = coverage_pct;
  cell.free_params = preset.num_free();
  const EvaluationSet eval = source.evaluation(coverage_pct, options.region);

  bool stopped = false;
  for (int r = 0; r < config.repeats && !stopped; ++r) {
    const Dataset train = source.training(coverage_pct, r, config.seed, options.resample_per_repeat);
    if (r == 0) cell.n_train = train.size();
    for (int s = 0; s < config.starts; ++s) {
      RunRecord rec = run_once(preset, train, s, r, eval, config);
      cell.total_runtime_s += rec.runtime_s;
      const bool failed = !(rec.nmse <= options.threshold);
      cell.runs.push_back(std::move(rec));
      if (failed && stop_on_failure) {
        stopped = true;
        break;
      }
    }
  }

  cell.max_nmse = 0.0;
  for (const auto& r : cell.runs) cell.max_nmse = std::max(cell.max_nmse, r.nmse);
  cell.passed = !stopped && cell_passes(cell.runs, config.runs(), options.threshold);
  if (power && options.mode == Mode::kMeasured) {
    cell.emissions = estimate(cell.total_runtime_s, *power);
  }
  return cell;
}

std::optional<int> find_threshold(const ModelTemplate& preset, const DataSource& source,
                                  const TrainConfig& config, const SweepOptions& options,
                                  std::vector<CellRecord>* cells) {
  std::vector<int> coverages = options.coverages;
  std::sort(coverages.begin(), coverages.end());
  for (int c : coverages) {
    CellRecord cell = run_cell(preset, c, source, config, options, std::nullopt, true);
    const bool passed = cell.passed;
    if (cells != nullptr) cells->push_back(std::move(cell));
    if (passed) return c;
  }
  return std::nullopt;
}

double delta_pct(double value, double baseline) {
  if (baseline == 0.0) throw std::invalid_argument("delta_pct: baseline is zero");
  return 100.0 * (value - baseline) / baseline;
}

const CellRecord* SweepReport::cell(const std::string& model, int coverage) const {
  for (const auto& c : cells) {
    if (c.model == model && c.coverage == coverage) return &c;
  }
  return nullptr;
}

SweepReport full_sweep(const std::vector<ModelTemplate>& presets, const DataSource& source,
                       const TrainConfig& config, const SweepOptions& options,
                       const std::optional<PowerModel>& power, std::string config_hash) {
  if (presets.empty()) throw std::invalid_argument("full_sweep: at least one preset is required");
  validate(config);
  std::vector<int> coverages = options.coverages;
  std::sort(coverages.begin(), coverages.end());
  for (int c : coverages) {
    if (!is_valid_coverage(c)) throw std::invalid_argument("invalid coverage " + std::to_string(c));
  }
  if (power) validate(*power);

  SweepReport report;
  report.metadata.seed = config.seed;
  report.metadata.config_hash = std::move(config_hash);
  report.metadata.mode = options.mode;
  report.metadata.sequential = options.mode == Mode::kMeasured;
  report.metadata.threshold = options.threshold;
  report.metadata.region = options.region;
  report.metadata.resample_per_repeat = options.resample_per_repeat;
  report.metadata.iterations = config.iterations;
  report.metadata.starts = config.starts;
  report.metadata.repeats = config.repeats;

  const std::size_t n_cells = presets.size() * coverages.size();
  report.cells.resize(n_cells);
  auto run = [&](std::size_t i) {
    const ModelTemplate& p = presets[i / coverages.size()];
    report.cells[i] = run_cell(p, coverages[i % coverages.size()], source, config, options,
                               options.mode == Mode::kMeasured ? power : std::nullopt);
  };

  if (options.mode == Mode::kMeasured) {
    for (std::size_t i = 0; i < n_cells; ++i) run(i);
  } else {
    std::vector<std::exception_ptr> errors(n_cells);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < n_cells; ++i) {
      try {
        run(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (const auto& p : presets) {
    ModelSummary s;
    s.model = p.name;
    s.free_params = p.num_free();
    for (int c : coverages) {
      const CellRecord* cell = report.cell(p.name, c);
      if (cell->passed) {
        s.threshold_coverage = c;
        s.threshold_runtime_s = cell->total_runtime_s;
        s.emissions = cell->emissions;
        break;
      }
    }
    report.models.push_back(s);
  }
  const ModelSummary& base = report.models.front();
  for (auto& s : report.models) {
    if (s.threshold_coverage && base.threshold_coverage) {
      s.delta_coverage_pct = delta_pct(*s.threshold_coverage, *base.threshold_coverage);
    }
    if (s.emissions && base.emissions && base.emissions->gco2e > 0.0) {
      s.delta_emissions_pct = delta_pct(s.emissions->gco2e, base.emissions->gco2e);
    }
  }
  return report;
}

double loglog_slope(std::span<const double> sizes, std::span<const double> times) {
  if (sizes.size() != times.size()) throw std::invalid_argument("loglog_slope: length mismatch");
  if (sizes.size() < 4) throw std::invalid_argument("loglog_slope: need at least four sizes");
  std::vector<double> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("loglog_slope: sizes must be distinct");
  }
  if (!(sorted.front() > 0.0) || sorted.back() < 4.0 * sorted.front()) {
    throw std::invalid_argument("loglog_slope: sizes must be positive and span a factor of four");
  }
  const auto n = static_cast<double>(sizes.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("loglog_slope: times must be positive");
    mx += std::log(sizes[i]);
    my += std::log(times[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double dx = std::log(sizes[i]) - mx;
    sxy += dx * (std::log(times[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ComplexityProbe complexity_probe(const ModelTemplate& preset, const DomainSpec& domain,
                                 const std::vector<int>& sizes, const TrainConfig& config) {
  ComplexityProbe probe;
  for (int n : sizes) probe.sizes.push_back(static_cast<double>(n));
  // Reject a degenerate size list before spending time on fits.
  loglog_slope(probe.sizes, std::vector<double>(sizes.size(), 1.0));
  validate(domain);

  const Band full{domain.x1_range[0], domain.x1_range[1]};
  for (int n : sizes) {
    const Dataset data = sample_uniform(
        domain, full, n, derive_seed(config.seed, {kProbeStream, static_cast<std::uint64_t>(n)}));
    const auto start = draw_start_point(preset, data, 0, config.seed);
    const FitResult f = fit(preset, data, start, config);
    probe.runtimes_s.push_back(f.runtime_s);
  }
  probe.exponent = loglog_slope(probe.sizes, probe.runtimes_s);
  return probe;
}

}  // namespace greygp
