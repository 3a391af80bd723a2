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

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "greygp/datasets.hpp"
#include "greygp/gp.hpp"

namespace greygp {

// Hyperparameter constraints. Positive parameters are optimized in log
// space, bounded ones through a scaled logistic, fixed ones not at all.
struct FreePositive {
  friend bool operator==(const FreePositive&, const FreePositive&) = default;
};
struct FreeReal {
  friend bool operator==(const FreeReal&, const FreeReal&) = default;
};
struct Bounded {
  double lo;
  double hi;
  friend bool operator==(const Bounded&, const Bounded&) = default;
};
struct Fixed {
  double value;
  friend bool operator==(const Fixed&, const Fixed&) = default;
};
using Constraint = std::variant<FreePositive, FreeReal, Bounded, Fixed>;

/// What a start-point draw is scaled by.
enum class InitScale {
  kNone,
  kInputSpread,     // mean standard deviation of the inputs the parameter reads
  kTargetVariance,  // sample variance of the targets
};

struct InitDistribution {
  enum class Kind {
    kLogUniform,        // exp(U[log lo, log hi]) * scale
    kTargetMeanSpread,  // U[mean(y) - sd(y), mean(y) + sd(y)]
    kWithinBounds,      // U[lo, hi] of a Bounded constraint
    kNone,              // fixed parameters
  };
  Kind kind = Kind::kNone;
  double lo = 0.1;
  double hi = 10.0;
  InitScale scale = InitScale::kNone;
  std::vector<std::size_t> dims;  // inputs read, for kInputSpread

  friend bool operator==(const InitDistribution&, const InitDistribution&) = default;
};

struct ParamSpec {
  std::string name;
  Constraint constraint = FreePositive{};
  InitDistribution init;

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

bool is_fixed(const ParamSpec& spec);
std::string describe(const Constraint& c);

/// Throws std::invalid_argument when `value` violates the constraint.
double to_unconstrained(double value, const ParamSpec& spec);
double from_unconstrained(double u, const ParamSpec& spec);
/// d from_unconstrained / du.
double from_unconstrained_derivative(double u, const ParamSpec& spec);

struct InitRanges {
  std::array<double, 2> lengthscale{0.1, 10.0};
  std::array<double, 2> variance{0.1, 10.0};
  std::array<double, 2> noise{1e-4, 1e-1};

  friend bool operator==(const InitRanges&, const InitRanges&) = default;
};

struct TrainConfig {
  int iterations = 1000;
  double learning_rate = 0.1;
  int starts = 3;
  int repeats = 3;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  InitRanges init;

  int runs() const { return starts * repeats; }
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& config);

/// Non-finite gradient during optimization.
class DivergedRun : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamState {
  Vector m;
  Vector v;

  explicit AdamState(Eigen::Index n = 0) : m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

/// One bias-corrected ADAM update for gradient ascent; returns the step to
/// add to the parameters. `t` counts from 1.
Vector adam_step(AdamState& state, const Vector& grad, int t, const TrainConfig& config);

/// A model together with one ParamSpec per model parameter (canonical order).
struct ModelTemplate {
  std::string name;
  GPModel model;
  std::vector<ParamSpec> params;

  std::vector<bool> free_mask() const;
  std::size_t num_free() const;
};

void validate(const ModelTemplate& tmpl, std::size_t input_dim = 0);

struct FitTrace {
  std::vector<std::string> names;
  std::vector<double> lml;                  // before each step
  std::vector<std::vector<double>> params;  // full canonical vector before each step
};

void write_trace_csv(const FitTrace& trace, std::ostream& out);

struct FitResult {
  bool ok = true;
  std::string diagnostic;
  GPModel model;
  FitTrace trace;
  double final_lml = 0.0;
  double runtime_s = 0.0;
  int jittered_iterations = 0;
  double max_jitter = 0.0;
};

/// Start point for `start_index`: quantiles are drawn from the seed stream of
/// the start index, then scaled by the statistics of `data`.
std::vector<double> draw_start_point(const ModelTemplate& tmpl, const Dataset& data,
                                     int start_index, std::uint64_t seed);

/// Exactly config.iterations full-batch ADAM ascent steps on the marginal
/// likelihood, returning the last iterate. Numerical failures end the run
/// with ok = false instead of throwing.
FitResult fit(const ModelTemplate& tmpl, const Dataset& data, std::span<const double> start_point,
              const TrainConfig& config);

struct RunRecord {
  int start = 0;
  int repeat = 0;
  bool ok = true;
  std::string diagnostic;
  GPModel model;
  double final_lml = 0.0;
  double nmse = 0.0;
  double runtime_s = 0.0;
  std::size_t n_train = 0;
  int jittered_iterations = 0;
};

/// One fit from start point `start`, scored on `eval`. Failures are recorded
/// in the result (ok = false, NMSE = +inf) rather than thrown.
RunRecord run_once(const ModelTemplate& tmpl, const Dataset& train, int start, int repeat,
                   const EvaluationSet& eval, const TrainConfig& config);

/// Training set for a given repeat index.
using DatasetProvider = std::function<Dataset(int repeat)>;

/// starts x repeats fits, repeat-major. Every run is scored on `eval`; failed
/// runs carry NMSE = +inf. Runs execute sequentially.
std::vector<RunRecord> multi_start_fit(const ModelTemplate& tmpl, const DatasetProvider& data,
                                       const EvaluationSet& eval, const TrainConfig& config);

/// Fixed dataset: repeats after the first see a seeded row permutation.
std::vector<RunRecord> multi_start_fit(const ModelTemplate& tmpl, const Dataset& data,
                                       const EvaluationSet& eval, const TrainConfig& config);

}  // namespace greygp
