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

#include "greygp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace greygp {

namespace {

using nlohmann::json;

// Reads typed fields from a JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  template <class T>
  T require(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    T out{};
    read(key, out);
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Mode parse_mode(const std::string& s) {
  if (s == "measured") return Mode::kMeasured;
  if (s == "fast") return Mode::kFast;
  throw ConfigError("mode must be 'measured' or 'fast', got '" + s + "'");
}

NmseRegion parse_region(const std::string& s) {
  if (s == "full") return NmseRegion::kFull;
  if (s == "uncovered") return NmseRegion::kUncovered;
  throw ConfigError("nmse_region must be 'full' or 'uncovered', got '" + s + "'");
}

DomainSpec parse_domain(const json& j) {
  DomainSpec d;
  ObjectReader r(j, "domain");
  r.read("x1_range", d.x1_range);
  r.read("x2_range", d.x2_range);
  r.read("points_per_decile", d.points_per_decile);
  r.read("noise_sd", d.noise_sd);
  r.read("grid_resolution", d.grid_resolution);
  r.finish();
  return d;
}

TrainConfig parse_train(const json& j) {
  TrainConfig t;
  ObjectReader r(j, "train");
  r.read("iterations", t.iterations);
  r.read("learning_rate", t.learning_rate);
  r.read("starts", t.starts);
  r.read("repeats", t.repeats);
  std::array<double, 2> betas{t.beta1, t.beta2};
  r.read("adam_betas", betas);
  t.beta1 = betas[0];
  t.beta2 = betas[1];
  r.read("adam_eps", t.eps);
  if (r.has("init")) {
    ObjectReader ir(r.raw("init"), "train.init");
    ir.read("lengthscale", t.init.lengthscale);
    ir.read("variance", t.init.variance);
    ir.read("noise", t.init.noise);
    ir.finish();
  }
  r.finish();
  return t;
}

PowerModel parse_power(const json& j) {
  PowerModel p;
  ObjectReader r(j, "power");
  r.read("cpu_tdp_w", p.cpu_tdp_w);
  r.read("cpu_load_factor", p.cpu_load_factor);
  r.read("ram_gb", p.ram_gb);
  r.read("ram_w_per_gb", p.ram_w_per_gb);
  r.read("pue", p.pue);
  p.carbon_intensity = r.require<double>("carbon_intensity");
  r.finish();
  return p;
}

Constraint parse_constraint(const json& j, const std::string& name) {
  if (j.is_string() && j.get<std::string>() == "free") {
    return name == "mean" ? Constraint{FreeReal{}} : Constraint{FreePositive{}};
  }
  ObjectReader r(j, "constraints." + name);
  Constraint c;
  if (r.has("bounded")) {
    const auto b = r.require<std::array<double, 2>>("bounded");
    c = Bounded{b[0], b[1]};
  } else if (r.has("fixed")) {
    c = Fixed{r.require<double>("fixed")};
  } else {
    throw ConfigError("constraints." + name + ": expected \"free\", {\"bounded\": [lo, hi]} or " +
                      "{\"fixed\": value}");
  }
  r.finish();
  return c;
}

json power_to_json(const PowerModel& p) {
  return {{"cpu_tdp_w", p.cpu_tdp_w},     {"cpu_load_factor", p.cpu_load_factor},
          {"ram_gb", p.ram_gb},           {"ram_w_per_gb", p.ram_w_per_gb},
          {"pue", p.pue},                 {"carbon_intensity", p.carbon_intensity}};
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

json kernel_to_json(const KernelSpec& spec) {
  json j = {{"kind", to_string(spec.kind)}, {"variance", spec.variance}};
  if (spec.kind == KernelKind::Product) {
    json children = json::array();
    for (const auto& c : spec.children) children.push_back(kernel_to_json(c));
    j["children"] = children;
    return j;
  }
  j["lengthscale"] = spec.lengthscale;
  j["active_dims"] = spec.active_dims;
  if (spec.kind == KernelKind::Periodic) j["period"] = spec.period;
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  ObjectReader r(j, "kernel");
  KernelSpec spec;
  try {
    spec.kind = kernel_kind_from_string(r.require<std::string>("kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  r.read("variance", spec.variance);
  if (spec.kind == KernelKind::Product) {
    spec.active_dims.clear();
    const json& children = r.raw("children");
    if (!children.is_array()) throw ConfigError("kernel.children must be an array");
    for (const auto& c : children) spec.children.push_back(kernel_from_json(c));
  } else {
    r.read("lengthscale", spec.lengthscale);
    r.read("active_dims", spec.active_dims);
    if (spec.kind == KernelKind::Periodic) r.read("period", spec.period);
  }
  r.finish();
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  return spec;
}

SweepOptions RunConfig::sweep_options() const {
  SweepOptions o;
  o.threshold = threshold;
  o.mode = mode;
  o.region = region;
  o.resample_per_repeat = resample_per_repeat;
  o.coverages = coverages;
  return o;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

RunConfig default_config() {
  RunConfig c;
  for (const auto& n : preset_names()) c.presets.push_back({n, std::nullopt});
  return c;
}

RunConfig parse_config(const json& j) {
  RunConfig c = default_config();
  ObjectReader r(j, "config");
  r.read("seed", c.seed);
  std::string mode = to_string(c.mode);
  r.read("mode", mode);
  c.mode = parse_mode(mode);
  r.read("threshold", c.threshold);
  std::string out = c.out.string();
  r.read("out", out);
  c.out = out;
  std::string region = to_string(c.region);
  r.read("nmse_region", region);
  c.region = parse_region(region);
  r.read("resample_per_repeat", c.resample_per_repeat);
  r.read("coverages", c.coverages);
  r.read("true_period", c.true_period);
  if (r.has("data_csv")) c.data_csv = r.require<std::string>("data_csv");
  if (r.has("domain")) c.domain = parse_domain(r.raw("domain"));
  if (r.has("train")) c.train = parse_train(r.raw("train"));
  if (r.has("power")) c.power = parse_power(r.raw("power"));
  if (r.has("presets")) {
    const json& presets = r.raw("presets");
    if (!presets.is_array() || presets.empty()) {
      throw ConfigError("presets must be a non-empty array");
    }
    c.presets.clear();
    for (const auto& p : presets) {
      if (p.is_string()) {
        c.presets.push_back({p.get<std::string>(), std::nullopt});
      } else if (p.is_object() && p.contains("name") && p["name"].is_string()) {
        c.presets.push_back({p["name"].get<std::string>(), p});
      } else {
        throw ConfigError("presets entries must be names or objects with a 'name'");
      }
    }
  }
  r.finish();

  try {
    validate(c.domain);
    validate(c.train);
    if (c.power) validate(*c.power);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(c.threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (!(c.true_period > 0.0)) throw ConfigError("true_period must be positive");
  if (c.coverages.empty()) throw ConfigError("coverages must not be empty");
  for (int cov : c.coverages) {
    if (!is_valid_coverage(cov)) {
      throw ConfigError("coverage " + std::to_string(cov) + " is not one of 10, 20, ..., 100");
    }
  }
  resolve_presets(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json presets = json::array();
  for (const auto& p : c.presets) presets.push_back(p.custom ? *p.custom : json(p.name));
  json j = {
      {"seed", c.seed},
      {"mode", to_string(c.mode)},
      {"threshold", c.threshold},
      {"out", c.out.string()},
      {"nmse_region", to_string(c.region)},
      {"resample_per_repeat", c.resample_per_repeat},
      {"coverages", c.coverages},
      {"true_period", c.true_period},
      {"domain",
       {{"x1_range", c.domain.x1_range},
        {"x2_range", c.domain.x2_range},
        {"points_per_decile", c.domain.points_per_decile},
        {"noise_sd", c.domain.noise_sd},
        {"grid_resolution", c.domain.grid_resolution}}},
      {"train",
       {{"iterations", c.train.iterations},
        {"learning_rate", c.train.learning_rate},
        {"starts", c.train.starts},
        {"repeats", c.train.repeats},
        {"adam_betas", {c.train.beta1, c.train.beta2}},
        {"adam_eps", c.train.eps},
        {"init",
         {{"lengthscale", c.train.init.lengthscale},
          {"variance", c.train.init.variance},
          {"noise", c.train.init.noise}}}}},
      {"presets", presets},
  };
  if (c.power) j["power"] = power_to_json(*c.power);
  if (c.data_csv) j["data_csv"] = c.data_csv->string();
  return j;
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("out");
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(j.dump());
  return os.str();
}

ModelTemplate resolve_preset(const PresetConfig& preset, const RunConfig& config) {
  if (!preset.custom) {
    try {
      return make_preset(preset.name, config.train.init, config.true_period);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  ObjectReader r(*preset.custom, "preset '" + preset.name + "'");
  r.require<std::string>("name");
  GPModel model;
  model.kernel = kernel_from_json(r.raw("kernel"));
  r.read("mean", model.mean);
  r.read("noise", model.noise_variance);
  json constraints = json::object();
  r.read("constraints", constraints);
  r.finish();
  try {
    ModelTemplate t = default_template(preset.name, model, config.train.init);
    std::vector<double> values = model_parameters(t.model);
    for (const auto& [name, spec] : constraints.items()) {
      auto it = std::find_if(t.params.begin(), t.params.end(),
                             [&](const ParamSpec& p) { return p.name == name; });
      if (it == t.params.end()) {
        throw ConfigError("preset '" + preset.name + "': no parameter named '" + name + "'");
      }
      it->constraint = parse_constraint(spec, name);
      if (const auto* f = std::get_if<Fixed>(&it->constraint)) {
        values[static_cast<std::size_t>(it - t.params.begin())] = f->value;
      } else if (std::holds_alternative<Bounded>(it->constraint)) {
        it->init.kind = InitDistribution::Kind::kWithinBounds;
      }
    }
    t.model = with_model_parameters(t.model, values);
    validate(t, 2);
    return t;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("preset '" + preset.name + "': " + e.what());
  }
}

std::vector<ModelTemplate> resolve_presets(const RunConfig& config) {
  std::vector<ModelTemplate> out;
  for (const auto& p : config.presets) out.push_back(resolve_preset(p, config));
  return out;
}

DataSource make_data_source(const RunConfig& config) {
  if (config.data_csv) return DataSource::external(load_csv(*config.data_csv));
  return DataSource::toy(config.domain);
}

}  // namespace greygp
