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
#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <string>

#include "greygp/gp.hpp"

namespace greygp {

/// Input domain and sampling density for the synthetic surface.
struct DomainSpec {
  std::array<double, 2> x1_range{0.0, 10.0};
  std::array<double, 2> x2_range{-5.0, 5.0};
  int points_per_decile = 100;
  double noise_sd = 0.05;
  std::array<int, 2> grid_resolution{50, 50};

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

/// Period of the synthetic surface along x1.
inline constexpr double kToyPeriod = std::numbers::pi / 2.0;

void validate(const DomainSpec& domain);

/// y = sqrt(|x2|) * sin(4 x1)
double toy_surface(double x1, double x2);

bool is_valid_coverage(int coverage_pct);

struct Band {
  double lo;
  double hi;
};

/// The lowest `coverage_pct` percent of [lo, hi].
Band coverage_band(double lo, double hi, int coverage_pct);

/// n points uniform over `x1_band` x the full x2 range, noisy targets.
Dataset sample_uniform(const DomainSpec& domain, Band x1_band, int n, std::uint64_t seed);

/// Training set drawn uniformly from the coverage band of x1 and the full x2
/// range, (coverage_pct / 10) * points_per_decile points, with Gaussian noise
/// of noise_sd on the targets. Pure function of its arguments.
Dataset sample_coverage(const DomainSpec& domain, int coverage_pct, std::uint64_t seed);

/// Inputs with noiseless targets, used for NMSE scoring.
struct EvaluationSet {
  Inputs x;
  Vector y;
};

/// Regular grid over the domain; x1 is the slow index.
EvaluationSet evaluation_grid(const DomainSpec& domain);

/// Points of `eval` with x1 strictly above `x1_limit`.
EvaluationSet restrict_above(const EvaluationSet& eval, double x1_limit);

class DataFormatError : public std::runtime_error {
 public:
  DataFormatError(const std::string& message, std::size_t line)
      : std::runtime_error(message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a `x1,x2,y` CSV file. Marks the result as external data.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::istream& in);

void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Rows of `data` in a seeded random order.
Dataset permute_rows(const Dataset& data, std::uint64_t seed);

/// Band of an external dataset, measured on its empirical x1 range.
Band empirical_band(const Dataset& data, int coverage_pct);

/// Rows of `data` whose x1 lies inside empirical_band(data, coverage_pct).
Dataset select_coverage(const Dataset& data, int coverage_pct);

}  // namespace greygp
