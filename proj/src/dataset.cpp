// Copyright 2026 The dpcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpcal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dpcal/rng.hpp"

namespace dpcal {

void Dataset::validate() const {
  if (num_classes < 2) throw std::invalid_argument("dataset needs at least 2 classes");
  for (const Example& ex : examples) {
    if (static_cast<int>(ex.features.size()) != dim)
      throw std::invalid_argument("example dimension mismatch");
    if (ex.label < 0 || ex.label >= num_classes)
      throw std::invalid_argument("label out of range");
    for (double f : ex.features)
      if (!std::isfinite(f)) throw std::invalid_argument("non-finite feature");
  }
}

Dataset make_gaussian_mixture(std::size_t n, std::uint64_t seed) {
  Dataset out;
  out.dim = 2;
  out.num_classes = 2;
  out.examples.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    // Rademacher label; +1 is stored as class 1, -1 as class 0.
    const int label = rng.bernoulli(0.5) ? 1 : 0;
    const double cx = (label == 1) ? 1.5 : 0.0;
    const double cy = (label == 1) ? 0.0 : 1.5;
    Example ex;
    ex.features = {cx + rng.normal(), cy + rng.normal()};
    ex.label = label;
    out.examples.push_back(std::move(ex));
  }
  return out;
}

SplitPair random_split(const Dataset& dataset, double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("split fraction must be in [0, 1]");
  const std::size_t n = dataset.size();
  const std::size_t n_recal =
      static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  // Fisher-Yates
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    std::swap(order[i - 1], order[j]);
  }

  SplitPair pair;
  pair.train.num_classes = pair.recal.num_classes = dataset.num_classes;
  pair.train.dim = pair.recal.dim = dataset.dim;
  pair.train.examples.reserve(n - n_recal);
  pair.recal.examples.reserve(n_recal);
  for (std::size_t i = 0; i < n; ++i) {
    const Example& ex = dataset.examples[order[i]];
    if (i < n_recal)
      pair.recal.examples.push_back(ex);
    else
      pair.train.examples.push_back(ex);
  }
  return pair;
}

Dataset corrupt_labels(const Dataset& dataset, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("corruption probability must be in [0, 1]");
  Dataset out = dataset;
  Rng rng(seed);
  for (Example& ex : out.examples) {
    if (rng.bernoulli(p))
      ex.label = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(out.num_classes)));
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "feature CSV parse error at line " << line << ": " << what;
  throw std::runtime_error(msg.str());
}

}  // namespace

Dataset load_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open feature file: " + path);

  Dataset out;
  out.num_classes = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      const char* first = line.data() + start;
      const char* last = line.data() + comma;
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc{} || ptr != last) parse_fail(line_no, "bad numeric field");
      fields.push_back(value);
      start = comma + 1;
      if (comma == line.size()) break;
    }
    if (fields.size() < 2) parse_fail(line_no, "row needs at least one feature and a label");
    const double raw_label = fields.back();
    fields.pop_back();
    if (raw_label < 0 || raw_label != std::floor(raw_label))
      parse_fail(line_no, "label must be a non-negative integer");
    for (double f : fields)
      if (!std::isfinite(f)) parse_fail(line_no, "non-finite feature");

    if (out.examples.empty()) {
      out.dim = static_cast<int>(fields.size());
    } else if (static_cast<int>(fields.size()) != out.dim) {
      parse_fail(line_no, "ragged row");
    }
    Example ex;
    ex.features = std::move(fields);
    ex.label = static_cast<int>(raw_label);
    out.num_classes = std::max(out.num_classes, ex.label + 1);
    out.examples.push_back(std::move(ex));
  }
  if (out.examples.empty()) throw std::runtime_error("feature file is empty: " + path);
  out.num_classes = std::max(out.num_classes, 2);
  return out;
}

void save_features(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write feature file: " + path);
  out.precision(17);
  for (const Example& ex : dataset.examples) {
    for (double f : ex.features) out << f << ',';
    out << ex.label << '\n';
  }
}

}  // namespace dpcal
