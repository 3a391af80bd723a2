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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace greygp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Input points, one per row. Row-major so a point is a contiguous span.
using Inputs = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class KernelKind { SquaredExponential, Periodic, Product };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Covariance function description.
///
/// Leaves are squared-exponential or periodic factors that read only their
/// `active_dims`. A product node multiplies its children. A kernel tree
/// carries exactly one output variance, on its root; every non-root node
/// must have unit variance.
struct KernelSpec {
  KernelKind kind = KernelKind::SquaredExponential;
  double lengthscale = 1.0;
  double variance = 1.0;
  double period = 1.0;  // Periodic only
  std::vector<std::size_t> active_dims{0};
  std::vector<KernelSpec> children;  // Product only

  static KernelSpec squared_exponential(double lengthscale, std::vector<std::size_t> dims,
                                        double variance = 1.0);
  static KernelSpec periodic(double lengthscale, double period, std::size_t dim,
                             double variance = 1.0);
  static KernelSpec product(std::vector<KernelSpec> children, double variance);

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Throws std::invalid_argument when the tree breaks an invariant. When
/// `input_dim` is non-zero every active dimension must be below it.
void validate(const KernelSpec& spec, std::size_t input_dim = 0);

// Hyperparameter vector, canonical order: root variance, every leaf
// lengthscale in tree order, every periodic leaf's period in tree order.
std::size_t num_kernel_parameters(const KernelSpec& spec);
std::vector<double> kernel_parameters(const KernelSpec& spec);
std::vector<std::string> kernel_parameter_names(const KernelSpec& spec);
KernelSpec with_kernel_parameters(KernelSpec spec, std::span<const double> values);

double eval_se(std::span<const double> x, std::span<const double> x2, double lengthscale,
               double variance, std::span<const std::size_t> active_dims);

/// Requires exactly one active dimension.
double eval_periodic(std::span<const double> x, std::span<const double> x2, double lengthscale,
                     double period, double variance, std::span<const std::size_t> active_dims);

double eval_kernel(const KernelSpec& spec, std::span<const double> x, std::span<const double> x2);

// The Gram-matrix routines below are OpenMP-parallel over rows. Serial
// entry-by-entry versions live in reference.hpp.

/// Cross-covariance, N x M.
Matrix covariance_matrix(const KernelSpec& spec, const Inputs& x, const Inputs& x2);

/// Symmetric Gram matrix, exactly symmetric (upper triangle mirrored).
Matrix covariance_matrix(const KernelSpec& spec, const Inputs& x);

/// dK/dtheta for each kernel hyperparameter in canonical order. When `mask`
/// is non-empty only parameters with mask[i] set are returned.
std::vector<Matrix> kernel_gradients(const KernelSpec& spec, const Inputs& x,
                                     std::span<const bool> mask = {});

/// For every kernel hyperparameter theta computes
///   sum_ij (alpha alpha^T - k_inv)_ij * dK_ij/dtheta
/// without materializing dK. `gram` is covariance_matrix(spec, x); only the
/// lower triangle of `k_inv` is read. Partial sums are reduced over fixed row
/// blocks so the result does not depend on the thread count.
std::vector<double> gradient_contractions(const KernelSpec& spec, const Inputs& x,
                                          const Matrix& gram, const Vector& alpha,
                                          const Matrix& k_inv);

}  // namespace greygp
