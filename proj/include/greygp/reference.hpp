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

#include <vector>

#include "greygp/kernels.hpp"

// Serial, entry-by-entry versions of the parallel Gram-matrix routines.
// They go through eval_kernel / kernel_gradients directly and are kept as
// the baseline for tests and the kernel benchmark.
namespace greygp::reference {

Matrix covariance_matrix(const KernelSpec& spec, const Inputs& x, const Inputs& x2);

/// Same contraction as greygp::gradient_contractions, computed from the
/// materialized dK/dtheta matrices and a dense weight matrix.
std::vector<double> gradient_contractions(const KernelSpec& spec, const Inputs& x,
                                          const Vector& alpha, const Matrix& k_inv);

}  // namespace greygp::reference
