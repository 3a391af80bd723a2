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

#include "greygp/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "greygp/carbon.hpp"
#include "greygp/rng.hpp"

namespace greygp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// Uniform in the open interval (0, 1).
double open_unit(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double input_spread(const Dataset& data, const std::vector<std::size_t>& dims) {
  if (dims.empty()) return 1.0;
  double total = 0.0;
  for (std::size_t d : dims) {
    const auto col = data.x.col(static_cast<Eigen::Index>(d));
    const double mean = col.mean();
    total += std::sqrt((col.array() - mean).square().mean());
  }
  const double spread = total / static_cast<double>(dims.size());
  return spread > 0.0 ? spread : 1.0;
}

double target_variance(const Dataset& data) {
  const double mean = data.y.mean();
  const double var = (data.y.array() - mean).square().mean();
  return var > 0.0 ? var : 1.0;
}

}  // namespace

bool is_fixed(const ParamSpec& spec) { return std::holds_alternative<Fixed>(spec.constraint); }

std::string describe(const Constraint& c) {
  return std::visit(Overloaded{
                        [](const FreePositive&) -> std::string { return "free-positive"; },
                        [](const FreeReal&) -> std::string { return "free-real"; },
                        [](const Bounded& b) -> std::string {
                          std::ostringstream os;
                          os.precision(17);
                          os << "bounded[" << b.lo << ", " << b.hi << "]";
                          return os.str();
                        },
                        [](const Fixed& f) -> std::string {
                          std::ostringstream os;
                          os.precision(17);
                          os << "fixed(" << f.value << ")";
                          return os.str();
                        },
                    },
                    c);
}

double to_unconstrained(double value, const ParamSpec& spec) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(spec.name + ": value must be finite");
  }
  return std::visit(
      Overloaded{
          [&](const FreePositive&) {
            if (value <= 0.0) throw std::invalid_argument(spec.name + ": value must be positive");
            return std::log(value);
          },
          [&](const FreeReal&) { return value; },
          [&](const Bounded& b) {
            if (value < b.lo || value > b.hi) {
              throw std::invalid_argument(spec.name + ": value outside " + describe(b));
            }
            const double q = (value - b.lo) / (b.hi - b.lo);
            return std::log(q) - std::log1p(-q);
          },
          [&](const Fixed& f) { return f.value; },
      },
      spec.constraint);
}

double from_unconstrained(double u, const ParamSpec& spec) {
  return std::visit(Overloaded{
                        [&](const FreePositive&) { return std::exp(u); },
                        [&](const FreeReal&) { return u; },
                        [&](const Bounded& b) {
                          return std::clamp(b.lo + (b.hi - b.lo) * logistic(u), b.lo, b.hi);
                        },
                        [&](const Fixed& f) { return f.value; },
                    },
                    spec.constraint);
}

double from_unconstrained_derivative(double u, const ParamSpec& spec) {
  return std::visit(Overloaded{
                        [&](const FreePositive&) { return std::exp(u); },
                        [&](const FreeReal&) { return 1.0; },
                        [&](const Bounded& b) {
                          const double s = logistic(u);
                          return (b.hi - b.lo) * s * (1.0 - s);
                        },
                        [&](const Fixed&) { return 0.0; },
                    },
                    spec.constraint);
}

void validate(const TrainConfig& c) {
  if (c.iterations < 1) throw std::invalid_argument("iterations must be positive");
  if (!(c.learning_rate > 0.0 && std::isfinite(c.learning_rate))) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (c.starts < 1 || c.repeats < 1) {
    throw std::invalid_argument("starts and repeats must be positive");
  }
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw std::invalid_argument("ADAM betas must lie in [0, 1)");
  }
  if (!(c.eps > 0.0)) throw std::invalid_argument("ADAM eps must be positive");
  for (const auto& r : {c.init.lengthscale, c.init.variance, c.init.noise}) {
    if (!(r[0] > 0.0 && r[0] <= r[1])) {
      throw std::invalid_argument("initialization ranges must satisfy 0 < lo <= hi");
    }
  }
}

Vector adam_step(AdamState& state, const Vector& grad, int t, const TrainConfig& config) {
  if (t < 1) throw std::invalid_argument("adam_step: iteration index starts at 1");
  if (state.m.size() != grad.size() || state.v.size() != grad.size()) {
    throw std::invalid_argument("adam_step: state and gradient sizes differ");
  }
  if (!grad.allFinite()) throw DivergedRun("non-finite gradient at iteration " + std::to_string(t));
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  return config.learning_rate * (state.m / c1).array() /
         ((state.v / c2).array().sqrt() + config.eps);
}

std::vector<bool> ModelTemplate::free_mask() const {
  std::vector<bool> mask;
  for (const auto& p : params) mask.push_back(!is_fixed(p));
  return mask;
}

std::size_t ModelTemplate::num_free() const {
  return static_cast<std::size_t>(
      std::count_if(params.begin(), params.end(), [](const auto& p) { return !is_fixed(p); }));
}

void validate(const ModelTemplate& tmpl, std::size_t input_dim) {
  validate(tmpl.model, input_dim);
  if (tmpl.params.size() != num_model_parameters(tmpl.model)) {
    throw std::invalid_argument(tmpl.name + ": expected " +
                                std::to_string(num_model_parameters(tmpl.model)) +
                                " parameter specs, got " + std::to_string(tmpl.params.size()));
  }
  const auto names = model_parameter_names(tmpl.model);
  const auto values = model_parameters(tmpl.model);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const ParamSpec& p = tmpl.params[i];
    if (p.name != names[i]) {
      throw std::invalid_argument(tmpl.name + ": parameter " + std::to_string(i) + " is '" +
                                  names[i] + "' but its spec is named '" + p.name + "'");
    }
    if (const auto* b = std::get_if<Bounded>(&p.constraint); b && !(b->lo < b->hi)) {
      throw std::invalid_argument(p.name + ": bounded constraint needs lo < hi");
    }
    if (names[i] != "mean" && std::holds_alternative<FreeReal>(p.constraint)) {
      throw std::invalid_argument(p.name + ": only the mean may be unconstrained");
    }
    if (const auto* b = std::get_if<Bounded>(&p.constraint);
        b && names[i] != "mean" && !(b->lo > 0.0)) {
      throw std::invalid_argument(p.name + ": bounds of a positive parameter must be positive");
    }
    if (const auto* f = std::get_if<Fixed>(&p.constraint); f && f->value != values[i]) {
      throw std::invalid_argument(p.name + ": model value differs from its fixed value");
    }
  }
}

void write_trace_csv(const FitTrace& trace, std::ostream& out) {
  out << "iteration,lml";
  for (const auto& n : trace.names) out << ',' << n;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < trace.lml.size(); ++i) {
    out << i << ',' << trace.lml[i];
    for (double v : trace.params[i]) out << ',' << v;
    out << '\n';
  }
}

std::vector<double> draw_start_point(const ModelTemplate& tmpl, const Dataset& data,
                                     int start_index, std::uint64_t seed) {
  validate(data);
  Rng rng(derive_seed(seed, {kStartStream, static_cast<std::uint64_t>(start_index)}));
  std::vector<double> out;
  for (const ParamSpec& p : tmpl.params) {
    const double q = open_unit(rng);
    const InitDistribution& init = p.init;
    if (const auto* f = std::get_if<Fixed>(&p.constraint)) {
      out.push_back(f->value);
      continue;
    }
    double scale = 1.0;
    if (init.scale == InitScale::kInputSpread) scale = input_spread(data, init.dims);
    if (init.scale == InitScale::kTargetVariance) scale = target_variance(data);
    switch (init.kind) {
      case InitDistribution::Kind::kLogUniform:
        out.push_back(scale *
                      std::exp(std::log(init.lo) + q * (std::log(init.hi) - std::log(init.lo))));
        break;
      case InitDistribution::Kind::kTargetMeanSpread: {
        const double mean = data.y.mean();
        const double sd = std::sqrt((data.y.array() - mean).square().mean());
        out.push_back(mean + (2.0 * q - 1.0) * sd);
        break;
      }
      case InitDistribution::Kind::kWithinBounds: {
        const auto* b = std::get_if<Bounded>(&p.constraint);
        if (b == nullptr) {
          throw std::invalid_argument(p.name + ": within-bounds init needs a bounded constraint");
        }
        out.push_back(b->lo + q * (b->hi - b->lo));
        break;
      }
      case InitDistribution::Kind::kNone:
        out.push_back(model_parameters(tmpl.model)[out.size()]);
        break;
    }
  }
  return out;
}

FitResult fit(const ModelTemplate& tmpl, const Dataset& data, std::span<const double> start_point,
              const TrainConfig& config) {
  validate(config);
  validate(data);
  validate(tmpl, static_cast<std::size_t>(data.x.cols()));
  const std::size_t np = tmpl.params.size();
  if (start_point.size() != np) {
    throw std::invalid_argument("fit: start point has " + std::to_string(start_point.size()) +
                                " entries, expected " + std::to_string(np));
  }

  const std::vector<bool> mask_vec = tmpl.free_mask();
  auto mask = std::make_unique<bool[]>(np);
  std::vector<std::size_t> free_idx;
  std::vector<double> theta(start_point.begin(), start_point.end());
  for (std::size_t i = 0; i < np; ++i) {
    mask[i] = mask_vec[i];
    if (mask_vec[i]) {
      free_idx.push_back(i);
    } else {
      theta[i] = std::get<Fixed>(tmpl.params[i].constraint).value;
    }
  }
  Vector u(static_cast<Eigen::Index>(free_idx.size()));
  for (std::size_t k = 0; k < free_idx.size(); ++k) {
    u[static_cast<Eigen::Index>(k)] = to_unconstrained(theta[free_idx[k]], tmpl.params[free_idx[k]]);
  }
  const std::span<const bool> mask_span(mask.get(), np);

  FitResult result;
  result.trace.names = model_parameter_names(tmpl.model);
  result.trace.lml.reserve(static_cast<std::size_t>(config.iterations));
  result.trace.params.reserve(static_cast<std::size_t>(config.iterations));

  auto sync_theta = [&] {
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
      const double v = from_unconstrained(u[static_cast<Eigen::Index>(k)], tmpl.params[free_idx[k]]);
      if (!std::isfinite(v)) {
        throw DivergedRun(tmpl.params[free_idx[k]].name + " left the finite range");
      }
      theta[free_idx[k]] = v;
    }
  };

  result.runtime_s = timed([&] {
    AdamState adam(u.size());
    Vector grad_u(u.size());
    try {
      for (int t = 1; t <= config.iterations; ++t) {
        sync_theta();
        const GPModel model = with_model_parameters(tmpl.model, theta);
        const LmlEvaluation eval = evaluate_lml(model, data, mask_span);
        if (eval.jitter > 0.0) {
          ++result.jittered_iterations;
          result.max_jitter = std::max(result.max_jitter, eval.jitter);
        }
        result.trace.lml.push_back(eval.value);
        result.trace.params.push_back(theta);
        for (std::size_t k = 0; k < free_idx.size(); ++k) {
          const auto kk = static_cast<Eigen::Index>(k);
          grad_u[kk] = eval.gradient[k] *
                       from_unconstrained_derivative(u[kk], tmpl.params[free_idx[k]]);
        }
        u += adam_step(adam, grad_u, t, config);
      }
      sync_theta();
      result.model = with_model_parameters(tmpl.model, theta);
      result.final_lml = log_marginal_likelihood(result.model, data);
    } catch (const NumericalFailure& e) {
      result.ok = false;
      result.diagnostic = std::string("numerical failure: ") + e.what();
    } catch (const DivergedRun& e) {
      result.ok = false;
      result.diagnostic = std::string("diverged: ") + e.what();
    } catch (const std::invalid_argument& e) {
      result.ok = false;
      result.diagnostic = std::string("invalid parameters: ") + e.what();
    }
  });
  if (!result.ok) {
    result.model = with_model_parameters(tmpl.model, theta);
    result.final_lml = -std::numeric_limits<double>::infinity();
  }
  return result;
}

RunRecord run_once(const ModelTemplate& tmpl, const Dataset& train, int start, int repeat,
                   const EvaluationSet& eval, const TrainConfig& config) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  RunRecord rec;
  rec.start = start;
  rec.repeat = repeat;
  rec.n_train = train.size();
  const std::vector<double> start_point = draw_start_point(tmpl, train, start, config.seed);
  FitResult f = fit(tmpl, train, start_point, config);
  rec.ok = f.ok;
  rec.diagnostic = std::move(f.diagnostic);
  rec.model = std::move(f.model);
  rec.final_lml = f.final_lml;
  rec.runtime_s = f.runtime_s;
  rec.jittered_iterations = f.jittered_iterations;
  rec.nmse = kInf;
  if (!rec.ok) return rec;
  try {
    const Prediction pred = Posterior(rec.model, train).predict(eval.x);
    rec.nmse = nmse(as_span(pred.mean), as_span(eval.y));
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.diagnostic = std::string("scoring failed: ") + e.what();
    rec.nmse = kInf;
    return rec;
  }
  if (!std::isfinite(rec.nmse)) {
    rec.ok = false;
    rec.diagnostic = "non-finite NMSE";
    rec.nmse = kInf;
  }
  return rec;
}

std::vector<RunRecord> multi_start_fit(const ModelTemplate& tmpl, const DatasetProvider& data,
                                       const EvaluationSet& eval, const TrainConfig& config) {
  validate(config);
  std::vector<RunRecord> records;
  for (int r = 0; r < config.repeats; ++r) {
    const Dataset train = data(r);
    for (int s = 0; s < config.starts; ++s) {
      records.push_back(run_once(tmpl, train, s, r, eval, config));
    }
  }
  return records;
}

std::vector<RunRecord> multi_start_fit(const ModelTemplate& tmpl, const Dataset& data,
                                       const EvaluationSet& eval, const TrainConfig& config) {
  const DatasetProvider provider = [&](int repeat) {
    if (repeat == 0) return data;
    return permute_rows(
        data, derive_seed(config.seed, {kShuffleStream, static_cast<std::uint64_t>(repeat)}));
  };
  return multi_start_fit(tmpl, provider, eval, config);
}

}  // namespace greygp
