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

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "greygp/kernels.hpp"

namespace greygp {

/// Constant-mean GP with Gaussian observation noise.
struct GPModel {
  double mean = 0.0;
  KernelSpec kernel;
  double noise_variance = 1e-2;

  friend bool operator==(const GPModel&, const GPModel&) = default;
};

void validate(const GPModel& model, std::size_t input_dim = 0);

// Model hyperparameters: the kernel's canonical vector followed by mean and
// noise variance.
std::size_t num_model_parameters(const GPModel& model);
std::vector<double> model_parameters(const GPModel& model);
std::vector<std::string> model_parameter_names(const GPModel& model);
GPModel with_model_parameters(GPModel model, std::span<const double> values);

enum class Provenance { Toy, Csv };

struct Dataset {
  Inputs x;
  Vector y;
  std::optional<int> coverage_pct;  // nullopt marks external data
  Provenance provenance = Provenance::Toy;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
};

void validate(const Dataset& data);

/// Cholesky factorization failed at every jitter level.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, std::vector<double> attempted_jitters);
  const std::vector<double>& attempted_jitters() const { return jitters_; }

 private:
  std::vector<double> jitters_;
};

/// Target variance is zero so NMSE is undefined.
class DegenerateTarget : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Diagonal jitter levels tried in order, relative to the mean diagonal.
inline constexpr double kJitterLevels[] = {0.0, 1e-8, 1e-6, 1e-4};

struct CholeskyFactor {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;  // absolute value added to the diagonal
};

/// Factorizes `k_y`, escalating diagonal jitter through kJitterLevels.
CholeskyFactor factorize(Matrix k_y);

struct LmlEvaluation {
  double value = 0.0;
  std::vector<double> gradient;  // one entry per free parameter, raw scale
  double jitter = 0.0;
};

/// Log marginal likelihood and, when `free_mask` is non-empty, its gradient
/// for the parameters whose mask entry is set. The mask covers all model
/// parameters in canonical order.
LmlEvaluation evaluate_lml(const GPModel& model, const Dataset& data,
                           std::span<const bool> free_mask);

double log_marginal_likelihood(const GPModel& model, const Dataset& data);

/// Gradient of the log marginal likelihood. An empty mask means every
/// parameter is free.
std::vector<double> lml_gradient(const GPModel& model, const Dataset& data,
                                 std::span<const bool> free_mask = {});

struct Prediction {
  Vector mean;
  Vector variance;  // includes observation noise
};

/// Factorized training state. Immutable after construction, so concurrent
/// predict calls are safe.
class Posterior {
 public:
  Posterior(GPModel model, const Dataset& train);

  Prediction predict(const Inputs& x_star) const;
  double log_marginal_likelihood() const { return lml_; }
  double jitter() const { return factor_.jitter; }
  const GPModel& model() const { return model_; }

 private:
  GPModel model_;
  Inputs x_;
  CholeskyFactor factor_;
  Vector alpha_;
  double lml_ = 0.0;
};

Prediction predict(const GPModel& model, const Dataset& train, const Inputs& x_star);

/// 100 * sum (p - t)^2 / (M * var(t)) with the population variance of the
/// truth, so predicting the mean of the truth scores 100.
double nmse(std::span<const double> predicted, std::span<const double> truth);

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace greygp
