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

#include "greygp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace greygp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Log determinant term and quadratic form from an existing factor.
double lml_from_factor(const CholeskyFactor& f, const Vector& residual, const Vector& alpha) {
  const auto n = static_cast<double>(residual.size());
  const double half_log_det = f.llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * residual.dot(alpha) - half_log_det - 0.5 * n * kLog2Pi;
}

Matrix noisy_gram(const GPModel& model, const Dataset& data, Matrix* gram_out) {
  Matrix k = covariance_matrix(model.kernel, data.x);
  if (gram_out != nullptr) *gram_out = k;
  k.diagonal().array() += model.noise_variance;
  return k;
}

}  // namespace

NumericalFailure::NumericalFailure(const std::string& what, std::vector<double> attempted_jitters)
    : std::runtime_error(what), jitters_(std::move(attempted_jitters)) {}

void validate(const GPModel& model, std::size_t input_dim) {
  validate(model.kernel, input_dim);
  if (!std::isfinite(model.mean)) throw std::invalid_argument("GP mean must be finite");
  if (!(std::isfinite(model.noise_variance) && model.noise_variance > 0.0)) {
    throw std::invalid_argument("GP noise variance must be positive and finite");
  }
}

std::size_t num_model_parameters(const GPModel& model) {
  return num_kernel_parameters(model.kernel) + 2;
}

std::vector<double> model_parameters(const GPModel& model) {
  std::vector<double> out = kernel_parameters(model.kernel);
  out.push_back(model.mean);
  out.push_back(model.noise_variance);
  return out;
}

std::vector<std::string> model_parameter_names(const GPModel& model) {
  std::vector<std::string> out = kernel_parameter_names(model.kernel);
  out.emplace_back("mean");
  out.emplace_back("noise");
  return out;
}

GPModel with_model_parameters(GPModel model, std::span<const double> values) {
  const std::size_t nk = num_kernel_parameters(model.kernel);
  if (values.size() != nk + 2) {
    throw std::invalid_argument("with_model_parameters: expected " + std::to_string(nk + 2) +
                                " values, got " + std::to_string(values.size()));
  }
  model.kernel = with_kernel_parameters(std::move(model.kernel), values.first(nk));
  model.mean = values[nk];
  model.noise_variance = values[nk + 1];
  return model;
}

void validate(const Dataset& data) {
  if (data.y.size() < 1) throw std::invalid_argument("dataset must contain at least one point");
  if (data.x.rows() != data.y.size()) {
    throw std::invalid_argument("dataset inputs and targets have different lengths");
  }
  if (!data.x.allFinite() || !data.y.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite values");
  }
}

CholeskyFactor factorize(Matrix k_y) {
  const double mean_diag = k_y.diagonal().mean();
  std::vector<double> attempted;
  double applied = 0.0;
  for (double level : kJitterLevels) {
    const double jitter = level * mean_diag;
    k_y.diagonal().array() += jitter - applied;
    applied = jitter;
    attempted.push_back(jitter);
    CholeskyFactor f{Eigen::LLT<Matrix>(k_y), jitter};
    if (f.llt.info() == Eigen::Success &&
        f.llt.matrixLLT().diagonal().array().isFinite().all()) {
      return f;
    }
  }
  throw NumericalFailure("Cholesky factorization failed at every jitter level", attempted);
}

LmlEvaluation evaluate_lml(const GPModel& model, const Dataset& data,
                           std::span<const bool> free_mask) {
  validate(model, static_cast<std::size_t>(data.x.cols()));
  validate(data);
  const std::size_t np = num_model_parameters(model);
  if (!free_mask.empty() && free_mask.size() != np) {
    throw std::invalid_argument("evaluate_lml: mask length " + std::to_string(free_mask.size()) +
                                " does not match " + std::to_string(np) + " parameters");
  }

  Matrix gram;
  const CholeskyFactor f = factorize(noisy_gram(model, data, &gram));
  const Vector residual = data.y.array() - model.mean;
  const Vector alpha = f.llt.solve(residual);

  LmlEvaluation out;
  out.jitter = f.jitter;
  out.value = lml_from_factor(f, residual, alpha);
  if (!std::isfinite(out.value)) {
    throw NumericalFailure("log marginal likelihood is not finite", {f.jitter});
  }
  if (free_mask.empty()) return out;

  const auto n = static_cast<Eigen::Index>(data.size());
  Matrix l_inv = Matrix::Identity(n, n);
  f.llt.matrixL().solveInPlace(l_inv);
  Matrix k_inv = Matrix::Zero(n, n);
  k_inv.selfadjointView<Eigen::Lower>().rankUpdate(l_inv.transpose());

  std::vector<double> full = gradient_contractions(model.kernel, data.x, gram, alpha, k_inv);
  for (double& g : full) g *= 0.5;
  full.push_back(alpha.sum());
  full.push_back(0.5 * (alpha.squaredNorm() - k_inv.trace()));

  for (std::size_t p = 0; p < np; ++p) {
    if (free_mask[p]) out.gradient.push_back(full[p]);
  }
  return out;
}

double log_marginal_likelihood(const GPModel& model, const Dataset& data) {
  return evaluate_lml(model, data, {}).value;
}

std::vector<double> lml_gradient(const GPModel& model, const Dataset& data,
                                 std::span<const bool> free_mask) {
  if (free_mask.empty()) {
    const std::size_t np = num_model_parameters(model);
    auto all = std::make_unique<bool[]>(np);
    std::fill_n(all.get(), np, true);
    return evaluate_lml(model, data, {all.get(), np}).gradient;
  }
  return evaluate_lml(model, data, free_mask).gradient;
}

Posterior::Posterior(GPModel model, const Dataset& train) : model_(std::move(model)) {
  validate(model_, static_cast<std::size_t>(train.x.cols()));
  validate(train);
  x_ = train.x;
  factor_ = factorize(noisy_gram(model_, train, nullptr));
  const Vector residual = train.y.array() - model_.mean;
  alpha_ = factor_.llt.solve(residual);
  lml_ = lml_from_factor(factor_, residual, alpha_);
}

Prediction Posterior::predict(const Inputs& x_star) const {
  Prediction out;
  const Eigen::Index m = x_star.rows();
  out.mean.resize(m);
  out.variance.resize(m);
  if (m == 0) return out;

  const Matrix k_star = covariance_matrix(model_.kernel, x_, x_star);
  out.mean = (k_star.transpose() * alpha_).array() + model_.mean;
  const Matrix v = factor_.llt.matrixL().solve(k_star);
  const auto d = static_cast<std::size_t>(x_star.cols());
  for (Eigen::Index j = 0; j < m; ++j) {
    const std::span<const double> xj{x_star.row(j).data(), d};
    const double prior = eval_kernel(model_.kernel, xj, xj);
    // Latent variance can round slightly negative near training points.
    const double latent = std::max(prior - v.col(j).squaredNorm(), 0.0);
    out.variance[j] = latent + model_.noise_variance;
  }
  return out;
}

Prediction predict(const GPModel& model, const Dataset& train, const Inputs& x_star) {
  return Posterior(model, train).predict(x_star);
}

double nmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("nmse: predicted and truth lengths differ");
  }
  if (truth.size() < 2) throw std::invalid_argument("nmse: at least two points are required");
  const auto m = static_cast<double>(truth.size());
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= m;
  double var = 0.0;
  for (double t : truth) var += (t - mean) * (t - mean);
  var /= m;
  if (!(var > 0.0)) throw DegenerateTarget("nmse: truth has zero variance");
  double sse = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predicted[i] - truth[i];
    sse += e * e;
  }
  return 100.0 * sse / (m * var);
}

}  // namespace greygp
