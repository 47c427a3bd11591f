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

#include "dpcal/dpsgd.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dpcal/calibration.hpp"
#include "dpcal/math.hpp"
#include <nlohmann/json.hpp>

namespace dpcal {

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::dp: return "dp";
    case TrainMode::non_private: return "non_private";
    case TrainMode::clip_only: return "clip_only";
    case TrainMode::noise_only: return "noise_only";
  }
  return "dp";
}

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "dp") return TrainMode::dp;
  if (name == "non_private") return TrainMode::non_private;
  if (name == "clip_only") return TrainMode::clip_only;
  if (name == "noise_only") return TrainMode::noise_only;
  throw std::invalid_argument("unknown train mode: " + name);
}

void DpSgdConfig::validate() const {
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip norm must be positive");
  if (!(noise_multiplier >= 0.0))
    throw std::invalid_argument("noise multiplier must be non-negative");
  if (expected_batch < 1) throw std::invalid_argument("expected batch must be at least 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
}

double DpSgdConfig::effective_sigma() const {
  switch (mode) {
    case TrainMode::clip_only:
    case TrainMode::non_private:
      return 0.0;
    default:
      return noise_multiplier;
  }
}

bool DpSgdConfig::clipping_enabled() const {
  return mode == TrainMode::dp || mode == TrainMode::clip_only;
}

std::string trace_to_jsonl(const TrainTrace& trace) {
  std::ostringstream out;
  for (const EpochRecord& r : trace) {
    nlohmann::json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["eval_loss"] = r.eval_loss;
    j["train_ece"] = r.train_ece;
    j["eval_ece"] = r.eval_ece;
    j["eval_acc"] = r.eval_acc;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<double> clip_per_example(std::span<const double> grad, double clip_norm) {
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip norm must be positive");
  const double norm = l2_norm(grad);
  std::vector<double> out(grad.begin(), grad.end());
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (double& g : out) g *= scale;
  }
  return out;
}

std::vector<double> noisy_update(const std::vector<std::vector<double>>& per_example_grads,
                                 const DpSgdConfig& cfg, Rng& noise) {
  if (per_example_grads.empty()) throw std::invalid_argument("empty gradient list");
  const std::size_t dim = per_example_grads.front().size();
  std::vector<double> sum(dim, 0.0);
  for (const std::vector<double>& g : per_example_grads) {
    if (g.size() != dim) throw std::invalid_argument("gradient dimension mismatch");
    if (cfg.clipping_enabled()) {
      const std::vector<double> clipped = clip_per_example(g, cfg.clip_norm);
      for (std::size_t j = 0; j < dim; ++j) sum[j] += clipped[j];
    } else {
      for (std::size_t j = 0; j < dim; ++j) sum[j] += g[j];
    }
  }
  const double inv_batch = 1.0 / static_cast<double>(cfg.expected_batch);
  for (double& s : sum) s *= inv_batch;

  const double sigma = cfg.effective_sigma();
  if (sigma > 0.0) {
    const double noise_std = cfg.clip_norm * sigma * inv_batch;
    for (double& s : sum) s += noise.normal(0.0, noise_std);
  }
  return sum;
}

namespace {

double dataset_mean_loss(const LinearModel& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const Example& ex : data.examples) {
    const std::vector<double> z = logits(model, ex.features);
    total += log_sum_exp(z) - z[static_cast<std::size_t>(ex.label)];
  }
  return total / static_cast<double>(data.size());
}

}  // namespace

TrainResult train(const LinearModel& init, const Dataset& data, const DpSgdConfig& cfg,
                  const Dataset& eval_data) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("training dataset is empty");
  if (init.dim != data.dim || init.num_classes < data.num_classes)
    throw std::invalid_argument("model/dataset dimension mismatch");

  const std::size_t n = data.size();
  const double q = std::min(1.0, static_cast<double>(cfg.expected_batch) /
                                     static_cast<double>(n));
  const std::size_t steps_per_epoch = (n + cfg.expected_batch - 1) / cfg.expected_batch;
  const std::size_t total_steps = cfg.epochs * steps_per_epoch;

  LinearModel model = init;
  std::vector<double> params = model.flatten();
  Rng rng(cfg.seed);
  TrainTrace trace;
  trace.reserve(cfg.epochs);

  const std::vector<double> zero_grad(params.size(), 0.0);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
      std::vector<Example> batch;
      for (const Example& ex : data.examples)
        if (rng.bernoulli(q)) batch.push_back(ex);

      std::vector<std::vector<double>> grads;
      if (batch.empty()) {
        grads.push_back(zero_grad);  // pure-noise step
      } else {
        grads = loss_and_per_example_grads(model, batch).second;
      }
      const std::vector<double> update = noisy_update(grads, cfg, rng);

      const double lr = cfg.lr_decay
                            ? cfg.learning_rate *
                                  (1.0 - static_cast<double>(step) /
                                             static_cast<double>(total_steps))
                            : cfg.learning_rate;
      for (std::size_t j = 0; j < params.size(); ++j) params[j] -= lr * update[j];
      model = LinearModel::unflatten(params, model.num_classes, model.dim);
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.train_loss = dataset_mean_loss(model, data);
    rec.eval_loss = dataset_mean_loss(model, eval_data);
    const CalibrationReport train_report = evaluate(model, std::nullopt, data, 15);
    rec.train_ece = train_report.ece;
    if (!eval_data.empty()) {
      const CalibrationReport eval_report = evaluate(model, std::nullopt, eval_data, 15);
      rec.eval_ece = eval_report.ece;
      rec.eval_acc = eval_report.accuracy;
    }
    if (!std::isfinite(rec.train_loss)) {
      std::ostringstream msg;
      msg << "training diverged (non-finite loss) at epoch " << rec.epoch;
      throw std::runtime_error(msg.str());
    }
    trace.push_back(rec);
  }

  TrainResult result{std::move(model), std::move(trace), PrivacyBudget::not_private()};
  if (cfg.mode == TrainMode::dp && cfg.noise_multiplier > 0.0) {
    result.spent = account({q, cfg.noise_multiplier, total_steps});
  }
  return result;
}

}  // namespace dpcal
