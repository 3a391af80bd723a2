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

// Parallel Gram-matrix routines against their serial reference versions.
// Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <random>

#include "greygp/kernels.hpp"
#include "greygp/reference.hpp"

namespace {

using namespace greygp;

Inputs random_inputs(Eigen::Index n) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Inputs x(n, 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

KernelSpec grey_kernel() {
  return KernelSpec::product(
      {KernelSpec::squared_exponential(1.2, {1}), KernelSpec::periodic(0.8, 1.57, 0)}, 1.5);
}

void BM_CovarianceParallel(benchmark::State& state) {
  const auto x = random_inputs(state.range(0));
  const auto k = grey_kernel();
  for (auto _ : state) benchmark::DoNotOptimize(covariance_matrix(k, x));
  state.SetComplexityN(state.range(0));
}

void BM_CovarianceReference(benchmark::State& state) {
  const auto x = random_inputs(state.range(0));
  const auto k = grey_kernel();
  for (auto _ : state) benchmark::DoNotOptimize(reference::covariance_matrix(k, x, x));
  state.SetComplexityN(state.range(0));
}

struct ContractionInputs {
  Inputs x;
  Matrix gram;
  Vector alpha;
  Matrix k_inv;
};

ContractionInputs contraction_inputs(Eigen::Index n) {
  ContractionInputs in{random_inputs(n), {}, {}, {}};
  in.gram = covariance_matrix(grey_kernel(), in.x);
  Matrix k_y = in.gram;
  k_y.diagonal().array() += 0.05;
  in.k_inv = k_y.llt().solve(Matrix::Identity(n, n));
  in.alpha = k_y.llt().solve(Vector::Ones(n));
  return in;
}

void BM_GradientParallel(benchmark::State& state) {
  const auto in = contraction_inputs(state.range(0));
  const auto k = grey_kernel();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gradient_contractions(k, in.x, in.gram, in.alpha, in.k_inv));
  }
  state.SetComplexityN(state.range(0));
}

void BM_GradientReference(benchmark::State& state) {
  const auto in = contraction_inputs(state.range(0));
  const auto k = grey_kernel();
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::gradient_contractions(k, in.x, in.alpha, in.k_inv));
  }
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_CovarianceParallel)->RangeMultiplier(2)->Range(128, 1024)->Complexity();
BENCHMARK(BM_CovarianceReference)->RangeMultiplier(2)->Range(128, 1024)->Complexity();
BENCHMARK(BM_GradientParallel)->RangeMultiplier(2)->Range(128, 1024)->Complexity();
BENCHMARK(BM_GradientReference)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

BENCHMARK_MAIN();
