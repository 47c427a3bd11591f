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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpcal/dataset.hpp"

namespace dpcal {

// Softmax-linear classifier. Parameters flatten row-major over the weight
// matrix, then the bias; that order fixes clip norms.
struct LinearModel {
  int num_classes = 0;
  int dim = 0;
  std::vector<double> weights;  // num_classes x dim, row-major
  std::vector<double> bias;     // num_classes

  static LinearModel zeros(int num_classes, int dim);

  std::size_t param_count() const {
    return weights.size() + bias.size();
  }
  std::vector<double> flatten() const;
  static LinearModel unflatten(std::span<const double> flat, int num_classes, int dim);
};

// W x + b.
std::vector<double> logits(const LinearModel& model, std::span<const double> x);

// Mean cross-entropy over the batch plus one flattened gradient of the
// per-example loss (not the mean) per example.
std::pair<double, std::vector<std::vector<double>>> loss_and_per_example_grads(
    const LinearModel& model, std::span<const Example> batch);

// Argmax class of softmax(logits) and its probability; ties break to the
// lowest class index.
std::pair<int, double> predict(const LinearModel& model, std::span<const double> x);

// Checkpoint JSON: {K, d, weights (row-major), bias}.
std::string model_to_json(const LinearModel& model);
LinearModel model_from_json(const std::string& text);

}  // namespace dpcal
