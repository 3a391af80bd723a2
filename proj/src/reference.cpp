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

#include "greygp/reference.hpp"

#include <stdexcept>

namespace greygp::reference {

Matrix covariance_matrix(const KernelSpec& spec, const Inputs& x, const Inputs& x2) {
  if (x.cols() != x2.cols()) throw std::invalid_argument("covariance_matrix: dimension mismatch");
  validate(spec, static_cast<std::size_t>(x.cols()));
  Matrix k(x.rows(), x2.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x2.rows(); ++j) {
      k(i, j) = eval_kernel(spec, {x.row(i).data(), static_cast<std::size_t>(x.cols())},
                            {x2.row(j).data(), static_cast<std::size_t>(x2.cols())});
    }
  }
  return k;
}

std::vector<double> gradient_contractions(const KernelSpec& spec, const Inputs& x,
                                          const Vector& alpha, const Matrix& k_inv) {
  const Matrix k_inv_full = k_inv.selfadjointView<Eigen::Lower>();
  const Matrix weight = alpha * alpha.transpose() - k_inv_full;
  std::vector<double> out;
  for (const Matrix& dk : kernel_gradients(spec, x)) out.push_back((weight.array() * dk.array()).sum());
  return out;
}

}  // namespace greygp::reference
