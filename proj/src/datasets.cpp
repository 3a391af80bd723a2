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

#include "greygp/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>
#include <vector>

#include "greygp/rng.hpp"

namespace greygp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_field(std::string_view field, std::size_t line, const char* column) {
  field = trim(field);
  double value = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw DataFormatError("line " + std::to_string(line) + ": column '" + column +
                              "' is not a number: '" + std::string(field) + "'",
                          line);
  }
  if (!std::isfinite(value)) {
    throw DataFormatError(
        "line " + std::to_string(line) + ": column '" + column + "' is not finite", line);
  }
  return value;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        (i == n - 1) ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return out;
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

void validate(const DomainSpec& d) {
  if (!(d.x1_range[0] < d.x1_range[1]) || !(d.x2_range[0] < d.x2_range[1])) {
    throw std::invalid_argument("domain ranges must satisfy lo < hi");
  }
  if (d.x1_range[1] - d.x1_range[0] < 3.0 * kToyPeriod) {
    throw std::invalid_argument("domain x1 range must span at least three periods of the surface");
  }
  if (d.points_per_decile <= 0) throw std::invalid_argument("points_per_decile must be positive");
  if (!(std::isfinite(d.noise_sd) && d.noise_sd >= 0.0)) {
    throw std::invalid_argument("noise_sd must be non-negative");
  }
  if (d.grid_resolution[0] <= 0 || d.grid_resolution[1] <= 0) {
    throw std::invalid_argument("grid_resolution must be positive");
  }
}

double toy_surface(double x1, double x2) { return std::sqrt(std::abs(x2)) * std::sin(4.0 * x1); }

bool is_valid_coverage(int pct) { return pct >= 10 && pct <= 100 && pct % 10 == 0; }

Band coverage_band(double lo, double hi, int pct) {
  if (!is_valid_coverage(pct)) {
    throw std::invalid_argument("coverage must be one of 10, 20, ..., 100 (got " +
                                std::to_string(pct) + ")");
  }
  return {lo, pct == 100 ? hi : lo + (hi - lo) * (pct / 100.0)};
}

Dataset sample_uniform(const DomainSpec& domain, Band x1_band, int n, std::uint64_t seed) {
  validate(domain);
  if (n < 1) throw std::invalid_argument("sample_uniform: need at least one point");
  if (!(x1_band.lo < x1_band.hi)) throw std::invalid_argument("sample_uniform: empty band");
  Rng rng(seed);
  std::uniform_real_distribution<double> u1(x1_band.lo, x1_band.hi);
  std::uniform_real_distribution<double> u2(domain.x2_range[0], domain.x2_range[1]);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset data;
  data.x.resize(n, 2);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double a = u1(rng);
    const double b = u2(rng);
    data.x(i, 0) = a;
    data.x(i, 1) = b;
    data.y[i] = toy_surface(a, b) + domain.noise_sd * noise(rng);
  }
  data.coverage_pct.reset();
  data.provenance = Provenance::Toy;
  return data;
}

Dataset sample_coverage(const DomainSpec& domain, int coverage_pct, std::uint64_t seed) {
  const Band band = coverage_band(domain.x1_range[0], domain.x1_range[1], coverage_pct);
  Dataset data = sample_uniform(
      domain, band, coverage_pct / 10 * domain.points_per_decile,
      derive_seed(seed, {0x70795f64617461ULL, static_cast<std::uint64_t>(coverage_pct)}));
  data.coverage_pct = coverage_pct;
  return data;
}

EvaluationSet evaluation_grid(const DomainSpec& domain) {
  validate(domain);
  const auto g1 = linspace(domain.x1_range[0], domain.x1_range[1], domain.grid_resolution[0]);
  const auto g2 = linspace(domain.x2_range[0], domain.x2_range[1], domain.grid_resolution[1]);
  EvaluationSet out;
  const auto m = static_cast<Eigen::Index>(g1.size() * g2.size());
  out.x.resize(m, 2);
  out.y.resize(m);
  Eigen::Index k = 0;
  for (double a : g1) {
    for (double b : g2) {
      out.x(k, 0) = a;
      out.x(k, 1) = b;
      out.y[k] = toy_surface(a, b);
      ++k;
    }
  }
  return out;
}

EvaluationSet restrict_above(const EvaluationSet& eval, double x1_limit) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < eval.x.rows(); ++i) {
    if (eval.x(i, 0) > x1_limit) keep.push_back(i);
  }
  EvaluationSet out;
  out.x = eval.x(keep, Eigen::all);
  out.y = eval.y(keep);
  return out;
}

Dataset parse_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataFormatError("empty CSV input: missing header", 1);
  ++line_no;
  std::string_view header = trim(line);
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  if (header != "x1,x2,y") {
    throw DataFormatError("line 1: expected header 'x1,x2,y', got '" + std::string(header) + "'",
                          1);
  }

  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      fields.push_back(row.substr(start, comma == std::string_view::npos ? row.npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 3) {
      throw DataFormatError("line " + std::to_string(line_no) + ": expected 3 fields, found " +
                                std::to_string(fields.size()),
                            line_no);
    }
    values.push_back(parse_field(fields[0], line_no, "x1"));
    values.push_back(parse_field(fields[1], line_no, "x2"));
    values.push_back(parse_field(fields[2], line_no, "y"));
  }
  const auto n = static_cast<Eigen::Index>(values.size() / 3);
  if (n < 2) throw DataFormatError("CSV must contain at least two data rows", line_no);

  Dataset data;
  data.x.resize(n, 2);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.x(i, 0) = values[static_cast<std::size_t>(3 * i)];
    data.x(i, 1) = values[static_cast<std::size_t>(3 * i + 1)];
    data.y[i] = values[static_cast<std::size_t>(3 * i + 2)];
  }
  data.coverage_pct.reset();
  data.provenance = Provenance::Csv;
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return parse_csv(in);
  } catch (const DataFormatError& e) {
    throw DataFormatError(path.string() + ": " + e.what(), e.line());
  }
}

void write_csv(const Dataset& data, std::ostream& out) {
  if (data.x.cols() != 2) throw std::invalid_argument("write_csv: only 2-D inputs are supported");
  std::string text = "x1,x2,y\n";
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    append_number(text, data.x(i, 0));
    text += ',';
    append_number(text, data.x(i, 1));
    text += ',';
    append_number(text, data.y[i]);
    text += '\n';
  }
  out << text;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv(data, out);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Dataset permute_rows(const Dataset& data, std::uint64_t seed) {
  std::vector<Eigen::Index> order(data.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Dataset out = data;
  out.x = data.x(order, Eigen::all);
  out.y = data.y(order);
  return out;
}

Band empirical_band(const Dataset& data, int coverage_pct) {
  validate(data);
  const double lo = data.x.col(0).minCoeff();
  const double hi = data.x.col(0).maxCoeff();
  return coverage_band(lo, hi, coverage_pct);
}

Dataset select_coverage(const Dataset& data, int coverage_pct) {
  const Band band = empirical_band(data, coverage_pct);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
    if (data.x(i, 0) <= band.hi) keep.push_back(i);
  }
  Dataset out;
  out.x = data.x(keep, Eigen::all);
  out.y = data.y(keep);
  out.coverage_pct = coverage_pct;
  out.provenance = data.provenance;
  return out;
}

}  // namespace greygp
