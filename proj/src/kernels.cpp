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

#include "greygp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace greygp {

namespace {

constexpr double kPi = std::numbers::pi;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": non-finite input coordinate");
    }
  }
}

void require_finite(const Inputs& x, const char* what) {
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite input coordinate");
  }
}

// A kernel tree reduced to its leaves; every product node just multiplies.
struct Leaf {
  KernelKind kind;
  double lengthscale;
  double period;
  std::span<const std::size_t> dims;
  std::size_t lengthscale_index;
  std::size_t period_index;  // only meaningful for periodic leaves
};

struct FlatKernel {
  double variance = 1.0;
  std::vector<Leaf> leaves;
  std::size_t num_params = 0;
};

void collect_leaves(const KernelSpec& node, std::vector<const KernelSpec*>& out) {
  if (node.kind == KernelKind::Product) {
    for (const auto& child : node.children) collect_leaves(child, out);
  } else {
    out.push_back(&node);
  }
}

FlatKernel flatten(const KernelSpec& spec) {
  std::vector<const KernelSpec*> nodes;
  collect_leaves(spec, nodes);
  const auto periodic_count = static_cast<std::size_t>(std::count_if(
      nodes.begin(), nodes.end(), [](auto* n) { return n->kind == KernelKind::Periodic; }));

  FlatKernel flat;
  flat.variance = spec.variance;
  flat.num_params = 1 + nodes.size() + periodic_count;
  std::size_t periodic_seen = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const KernelSpec& n = *nodes[i];
    Leaf leaf{n.kind, n.lengthscale, n.period, n.active_dims, 1 + i, 0};
    if (n.kind == KernelKind::Periodic) leaf.period_index = 1 + nodes.size() + periodic_seen++;
    flat.leaves.push_back(leaf);
  }
  return flat;
}

// Log of the unit-variance leaf factor.
inline double leaf_log_value(const Leaf& leaf, const double* x, const double* x2) {
  if (leaf.kind == KernelKind::SquaredExponential) {
    double r2 = 0.0;
    for (std::size_t d : leaf.dims) {
      const double diff = x[d] - x2[d];
      r2 += diff * diff;
    }
    return -r2 / (2.0 * leaf.lengthscale * leaf.lengthscale);
  }
  const double s = std::sin(kPi * std::abs(x[leaf.dims[0]] - x2[leaf.dims[0]]) / leaf.period);
  return -2.0 * s * s / (leaf.lengthscale * leaf.lengthscale);
}

inline double flat_value(const FlatKernel& k, const double* x, const double* x2) {
  double log_sum = 0.0;
  for (const Leaf& leaf : k.leaves) log_sum += leaf_log_value(leaf, x, x2);
  return k.variance * std::exp(log_sum);
}

// Accumulates weight * d(log k)/d(theta) into acc for the leaf's parameters.
inline void leaf_log_derivatives(const Leaf& leaf, const double* x, const double* x2,
                                 double weight, double* acc) {
  const double l = leaf.lengthscale;
  if (leaf.kind == KernelKind::SquaredExponential) {
    double r2 = 0.0;
    for (std::size_t d : leaf.dims) {
      const double diff = x[d] - x2[d];
      r2 += diff * diff;
    }
    acc[leaf.lengthscale_index] += weight * r2 / (l * l * l);
    return;
  }
  const double dist = std::abs(x[leaf.dims[0]] - x2[leaf.dims[0]]);
  const double arg = kPi * dist / leaf.period;
  const double s = std::sin(arg);
  const double c = std::cos(arg);
  acc[leaf.lengthscale_index] += weight * 4.0 * s * s / (l * l * l);
  acc[leaf.period_index] +=
      weight * 4.0 * kPi * dist * s * c / (leaf.period * leaf.period * l * l);
}

void validate_node(const KernelSpec& node, std::size_t input_dim, bool is_root) {
  if (!positive_finite(node.variance)) {
    throw std::invalid_argument("kernel variance must be positive and finite");
  }
  if (!is_root && node.variance != 1.0) {
    throw std::invalid_argument(
        "only the root of a kernel tree carries an output variance; children must have unit "
        "variance");
  }
  switch (node.kind) {
    case KernelKind::Product:
      if (node.children.size() < 2) {
        throw std::invalid_argument("a product kernel needs at least two children");
      }
      for (const auto& child : node.children) validate_node(child, input_dim, false);
      return;
    case KernelKind::Periodic:
      if (!positive_finite(node.period)) {
        throw std::invalid_argument("periodic kernel period must be positive and finite");
      }
      if (node.active_dims.size() != 1) {
        throw std::invalid_argument("periodic kernel needs exactly one active dimension");
      }
      [[fallthrough]];
    case KernelKind::SquaredExponential:
      if (!positive_finite(node.lengthscale)) {
        throw std::invalid_argument("kernel lengthscale must be positive and finite");
      }
      if (!node.children.empty()) {
        throw std::invalid_argument("leaf kernels cannot have children");
      }
      if (node.active_dims.empty()) {
        throw std::invalid_argument("kernel active_dims must be non-empty");
      }
      if (input_dim != 0) {
        for (std::size_t d : node.active_dims) {
          if (d >= input_dim) {
            throw std::invalid_argument("kernel active dimension " + std::to_string(d) +
                                        " out of range for " + std::to_string(input_dim) +
                                        "-dimensional inputs");
          }
        }
      }
      return;
  }
}

void assign_leaves(KernelSpec& node, std::span<const double> values, std::size_t& leaf,
                   std::size_t& periodic, std::size_t num_leaves) {
  if (node.kind == KernelKind::Product) {
    for (auto& child : node.children) assign_leaves(child, values, leaf, periodic, num_leaves);
    return;
  }
  node.lengthscale = values[1 + leaf++];
  if (node.kind == KernelKind::Periodic) node.period = values[1 + num_leaves + periodic++];
}

std::size_t count_leaves(const KernelSpec& node) {
  if (node.kind != KernelKind::Product) return 1;
  std::size_t n = 0;
  for (const auto& child : node.children) n += count_leaves(child);
  return n;
}

void check_inputs(const KernelSpec& spec, const Inputs& x, const Inputs& x2) {
  if (x.cols() != x2.cols()) {
    throw std::invalid_argument("covariance_matrix: input dimension mismatch (" +
                                std::to_string(x.cols()) + " vs " + std::to_string(x2.cols()) +
                                ")");
  }
  validate(spec, static_cast<std::size_t>(x.cols()));
  require_finite(x, "covariance_matrix");
  require_finite(x2, "covariance_matrix");
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::SquaredExponential: return "se";
    case KernelKind::Periodic: return "periodic";
    case KernelKind::Product: return "product";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "se" || name == "squared_exponential" || name == "rbf") {
    return KernelKind::SquaredExponential;
  }
  if (name == "periodic") return KernelKind::Periodic;
  if (name == "product") return KernelKind::Product;
  throw std::invalid_argument("unknown kernel kind '" + name + "'");
}

KernelSpec KernelSpec::squared_exponential(double lengthscale, std::vector<std::size_t> dims,
                                           double variance) {
  KernelSpec s;
  s.kind = KernelKind::SquaredExponential;
  s.lengthscale = lengthscale;
  s.variance = variance;
  s.active_dims = std::move(dims);
  return s;
}

KernelSpec KernelSpec::periodic(double lengthscale, double period, std::size_t dim,
                                double variance) {
  KernelSpec s;
  s.kind = KernelKind::Periodic;
  s.lengthscale = lengthscale;
  s.period = period;
  s.variance = variance;
  s.active_dims = {dim};
  return s;
}

KernelSpec KernelSpec::product(std::vector<KernelSpec> children, double variance) {
  KernelSpec s;
  s.kind = KernelKind::Product;
  s.variance = variance;
  s.active_dims.clear();
  s.children = std::move(children);
  return s;
}

void validate(const KernelSpec& spec, std::size_t input_dim) {
  validate_node(spec, input_dim, true);
}

std::size_t num_kernel_parameters(const KernelSpec& spec) { return flatten(spec).num_params; }

std::vector<double> kernel_parameters(const KernelSpec& spec) {
  const FlatKernel flat = flatten(spec);
  std::vector<double> out(flat.num_params);
  out[0] = flat.variance;
  for (const Leaf& leaf : flat.leaves) {
    out[leaf.lengthscale_index] = leaf.lengthscale;
    if (leaf.kind == KernelKind::Periodic) out[leaf.period_index] = leaf.period;
  }
  return out;
}

std::vector<std::string> kernel_parameter_names(const KernelSpec& spec) {
  const FlatKernel flat = flatten(spec);
  std::vector<std::string> out(flat.num_params);
  out[0] = "variance";
  for (std::size_t i = 0; i < flat.leaves.size(); ++i) {
    const Leaf& leaf = flat.leaves[i];
    out[leaf.lengthscale_index] = "lengthscale" + std::to_string(i);
    if (leaf.kind == KernelKind::Periodic) out[leaf.period_index] = "period" + std::to_string(i);
  }
  return out;
}

KernelSpec with_kernel_parameters(KernelSpec spec, std::span<const double> values) {
  const std::size_t leaves = count_leaves(spec);
  if (values.size() != num_kernel_parameters(spec)) {
    throw std::invalid_argument("with_kernel_parameters: expected " +
                                std::to_string(num_kernel_parameters(spec)) + " values, got " +
                                std::to_string(values.size()));
  }
  spec.variance = values[0];
  std::size_t leaf = 0;
  std::size_t periodic = 0;
  assign_leaves(spec, values, leaf, periodic, leaves);
  return spec;
}

double eval_se(std::span<const double> x, std::span<const double> x2, double lengthscale,
               double variance, std::span<const std::size_t> active_dims) {
  if (!positive_finite(lengthscale) || !positive_finite(variance)) {
    throw std::invalid_argument("eval_se: lengthscale and variance must be positive and finite");
  }
  require_finite(x, "eval_se");
  require_finite(x2, "eval_se");
  double r2 = 0.0;
  for (std::size_t d : active_dims) {
    if (d >= x.size() || d >= x2.size()) {
      throw std::invalid_argument("eval_se: active dimension out of range");
    }
    const double diff = x[d] - x2[d];
    r2 += diff * diff;
  }
  return variance * std::exp(-r2 / (2.0 * lengthscale * lengthscale));
}

double eval_periodic(std::span<const double> x, std::span<const double> x2, double lengthscale,
                     double period, double variance, std::span<const std::size_t> active_dims) {
  if (active_dims.size() != 1) {
    throw std::invalid_argument("eval_periodic: exactly one active dimension is required");
  }
  if (!positive_finite(lengthscale) || !positive_finite(period) || !positive_finite(variance)) {
    throw std::invalid_argument(
        "eval_periodic: lengthscale, period and variance must be positive and finite");
  }
  require_finite(x, "eval_periodic");
  require_finite(x2, "eval_periodic");
  const std::size_t d = active_dims[0];
  if (d >= x.size() || d >= x2.size()) {
    throw std::invalid_argument("eval_periodic: active dimension out of range");
  }
  const double s = std::sin(kPi * std::abs(x[d] - x2[d]) / period);
  return variance * std::exp(-2.0 * s * s / (lengthscale * lengthscale));
}

double eval_kernel(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> x2) {
  switch (spec.kind) {
    case KernelKind::SquaredExponential:
      return eval_se(x, x2, spec.lengthscale, spec.variance, spec.active_dims);
    case KernelKind::Periodic:
      return eval_periodic(x, x2, spec.lengthscale, spec.period, spec.variance, spec.active_dims);
    case KernelKind::Product: {
      if (spec.children.size() < 2) {
        throw std::invalid_argument("a product kernel needs at least two children");
      }
      double value = spec.variance;
      for (const auto& child : spec.children) {
        if (child.variance != 1.0) {
          throw std::invalid_argument("product children must have unit variance");
        }
        value *= eval_kernel(child, x, x2);
      }
      return value;
    }
  }
  throw std::invalid_argument("eval_kernel: unknown kernel kind");
}

Matrix covariance_matrix(const KernelSpec& spec, const Inputs& x, const Inputs& x2) {
  check_inputs(spec, x, x2);
  const FlatKernel flat = flatten(spec);
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x2.rows();
  Matrix k(n, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < m; ++j) {
    const double* xj = x2.row(j).data();
    for (Eigen::Index i = 0; i < n; ++i) k(i, j) = flat_value(flat, x.row(i).data(), xj);
  }
  return k;
}

Matrix covariance_matrix(const KernelSpec& spec, const Inputs& x) {
  check_inputs(spec, x, x);
  const FlatKernel flat = flatten(spec);
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* xj = x.row(j).data();
    k(j, j) = flat.variance;
    for (Eigen::Index i = j + 1; i < n; ++i) k(i, j) = flat_value(flat, x.row(i).data(), xj);
  }
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k;
}

std::vector<Matrix> kernel_gradients(const KernelSpec& spec, const Inputs& x,
                                     std::span<const bool> mask) {
  const Matrix k = covariance_matrix(spec, x);
  const FlatKernel flat = flatten(spec);
  if (!mask.empty() && mask.size() != flat.num_params) {
    throw std::invalid_argument("kernel_gradients: mask length does not match parameter count");
  }
  const Eigen::Index n = x.rows();
  std::vector<Matrix> all(flat.num_params, Matrix::Zero(n, n));
  all[0] = k / flat.variance;
  std::vector<double> dlog(flat.num_params);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      std::fill(dlog.begin(), dlog.end(), 0.0);
      for (const Leaf& leaf : flat.leaves) {
        leaf_log_derivatives(leaf, x.row(i).data(), x.row(j).data(), 1.0, dlog.data());
      }
      for (std::size_t p = 1; p < flat.num_params; ++p) all[p](i, j) = k(i, j) * dlog[p];
    }
  }
  if (mask.empty()) return all;
  std::vector<Matrix> selected;
  for (std::size_t p = 0; p < flat.num_params; ++p) {
    if (mask[p]) selected.push_back(std::move(all[p]));
  }
  return selected;
}

std::vector<double> gradient_contractions(const KernelSpec& spec, const Inputs& x,
                                          const Matrix& gram, const Vector& alpha,
                                          const Matrix& k_inv) {
  const FlatKernel flat = flatten(spec);
  const Eigen::Index n = x.rows();
  if (gram.rows() != n || gram.cols() != n || k_inv.rows() != n || k_inv.cols() != n ||
      alpha.size() != n) {
    throw std::invalid_argument("gradient_contractions: shape mismatch");
  }
  const std::size_t np = flat.num_params;
  constexpr Eigen::Index kBlock = 32;
  const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks) * np, 0.0);

#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    double* acc = partial.data() + static_cast<std::size_t>(b) * np;
    const Eigen::Index j_end = std::min(n, (b + 1) * kBlock);
    for (Eigen::Index j = b * kBlock; j < j_end; ++j) {
      const double* xj = x.row(j).data();
      const double aj = alpha[j];
      acc[0] += (aj * aj - k_inv(j, j)) * gram(j, j);
      for (Eigen::Index i = j + 1; i < n; ++i) {
        const double wk = 2.0 * (alpha[i] * aj - k_inv(i, j)) * gram(i, j);
        acc[0] += wk;
        for (const Leaf& leaf : flat.leaves) {
          leaf_log_derivatives(leaf, x.row(i).data(), xj, wk, acc);
        }
      }
    }
  }

  std::vector<double> out(np, 0.0);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    for (std::size_t p = 0; p < np; ++p) out[p] += partial[static_cast<std::size_t>(b) * np + p];
  }
  out[0] /= flat.variance;
  return out;
}

}  // namespace greygp
