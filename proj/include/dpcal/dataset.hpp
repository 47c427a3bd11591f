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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dpcal {

struct Example {
  std::vector<double> features;
  int label = 0;
};

// Immutable after construction; all examples share a dimension and every
// label is in [0, num_classes).
struct Dataset {
  std::vector<Example> examples;
  int num_classes = 2;
  int dim = 0;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  // Throws std::invalid_argument on a dimension/label/finiteness violation.
  void validate() const;
};

struct SplitPair {
  Dataset train;
  Dataset recal;
};

// 2D two-class Gaussian mixture: x | y ~ N(center_y, I), centers (1.5, 0)
// for class 1 and (0, 1.5) for class 0, labels fair coin flips.
Dataset make_gaussian_mixture(std::size_t n, std::uint64_t seed);

// Uniformly random partition with |recal| = round(alpha * n).
SplitPair random_split(const Dataset& dataset, double alpha, std::uint64_t seed);

// With probability p, replaces each label by a uniform draw over all
// num_classes classes (the original class may be redrawn).
Dataset corrupt_labels(const Dataset& dataset, double p, std::uint64_t seed);

// CSV schema: one row per example, `f_1,...,f_d,label`, no header.
Dataset load_features(const std::string& path);
void save_features(const Dataset& dataset, const std::string& path);

}  // namespace dpcal
