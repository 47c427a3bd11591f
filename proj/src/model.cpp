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

#include "dpcal/model.hpp"

#include <cmath>
#include <stdexcept>

#include "dpcal/math.hpp"
#include <nlohmann/json.hpp>

namespace dpcal {

LinearModel LinearModel::zeros(int num_classes, int dim) {
  LinearModel m;
  m.num_classes = num_classes;
  m.dim = dim;
  m.weights.assign(static_cast<std::size_t>(num_classes) * dim, 0.0);
  m.bias.assign(static_cast<std::size_t>(num_classes), 0.0);
  return m;
}

std::vector<double> LinearModel::flatten() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  flat.insert(flat.end(), weights.begin(), weights.end());
  flat.insert(flat.end(), bias.begin(), bias.end());
  return flat;
}

LinearModel LinearModel::unflatten(std::span<const double> flat, int num_classes, int dim) {
  const std::size_t n_w = static_cast<std::size_t>(num_classes) * dim;
  if (flat.size() != n_w + static_cast<std::size_t>(num_classes))
    throw std::invalid_argument("flattened parameter size mismatch");
  LinearModel m;
  m.num_classes = num_classes;
  m.dim = dim;
  m.weights.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(n_w));
  m.bias.assign(flat.begin() + static_cast<std::ptrdiff_t>(n_w), flat.end());
  return m;
}

std::vector<double> logits(const LinearModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.dim)
    throw std::invalid_argument("feature dimension mismatch");
  std::vector<double> out(static_cast<std::size_t>(model.num_classes));
  for (int k = 0; k < model.num_classes; ++k) {
    double acc = model.bias[static_cast<std::size_t>(k)];
    const double* row = model.weights.data() + static_cast<std::size_t>(k) * model.dim;
    for (int j = 0; j < model.dim; ++j) acc += row[j] * x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

std::pair<double, std::vector<std::vector<double>>> loss_and_per_example_grads(
    const LinearModel& model, std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const int K = model.num_classes;
  const int d = model.dim;
  double loss_sum = 0.0;
  std::vector<std::vector<double>> grads;
  grads.reserve(batch.size());

  for (const Example& ex : batch) {
    if (ex.label < 0 || ex.label >= K) throw std::invalid_argument("label out of range");
    const std::vector<double> z = logits(model, ex.features);
    const double lse = log_sum_exp(z);
    loss_sum += lse - z[static_cast<std::size_t>(ex.label)];

    // d loss / d z_k = softmax_k - 1{k == y}
    std::vector<double> grad(model.param_count());
    for (int k = 0; k < K; ++k) {
      double gk = std::exp(z[static_cast<std::size_t>(k)] - lse);
      if (k == ex.label) gk -= 1.0;
      const std::size_t row = static_cast<std::size_t>(k) * d;
      for (int j = 0; j < d; ++j)
        grad[row + static_cast<std::size_t>(j)] = gk * ex.features[static_cast<std::size_t>(j)];
      grad[static_cast<std::size_t>(K) * d + static_cast<std::size_t>(k)] = gk;
    }
    grads.push_back(std::move(grad));
  }
  return {loss_sum / static_cast<double>(batch.size()), std::move(grads)};
}

std::pair<int, double> predict(const LinearModel& model, std::span<const double> x) {
  const std::vector<double> z = logits(model, x);
  int best = 0;
  for (int k = 1; k < model.num_classes; ++k)
    if (z[static_cast<std::size_t>(k)] > z[static_cast<std::size_t>(best)]) best = k;
  const std::vector<double> p = softmax(z);
  return {best, p[static_cast<std::size_t>(best)]};
}

std::string model_to_json(const LinearModel& model) {
  nlohmann::json j;
  j["K"] = model.num_classes;
  j["d"] = model.dim;
  j["weights"] = model.weights;
  j["bias"] = model.bias;
  return j.dump();
}

LinearModel model_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  LinearModel m;
  m.num_classes = j.at("K").get<int>();
  m.dim = j.at("d").get<int>();
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<std::vector<double>>();
  if (m.weights.size() != static_cast<std::size_t>(m.num_classes) * m.dim ||
      m.bias.size() != static_cast<std::size_t>(m.num_classes))
    throw std::invalid_argument("checkpoint dimensions inconsistent");
  return m;
}

}  // namespace dpcal
