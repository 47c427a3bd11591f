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

#include "dpcal/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dpcal {

Recalibrator Recalibrator::identity_platt(int num_classes) {
  Recalibrator r;
  r.kind = Kind::platt;
  r.platt = LinearModel::zeros(num_classes, num_classes);
  for (int k = 0; k < num_classes; ++k)
    r.platt.weights[static_cast<std::size_t>(k) * num_classes + k] = 1.0;
  return r;
}

std::size_t bin_index(double confidence, std::size_t num_bins) {
  if (confidence <= 0.0) return 0;
  const double scaled = confidence * static_cast<double>(num_bins);
  const auto idx = static_cast<std::size_t>(std::ceil(scaled)) - 1;
  return std::min(idx, num_bins - 1);
}

BinStats reliability_bins(std::span<const double> confidences,
                          const std::vector<bool>& correct, std::size_t num_bins) {
  if (confidences.empty()) throw std::invalid_argument("no confidences");
  if (num_bins < 1) throw std::invalid_argument("need at least one bin");
  if (confidences.size() != correct.size())
    throw std::invalid_argument("confidence/correctness length mismatch");

  BinStats bins;
  bins.lo.resize(num_bins);
  bins.hi.resize(num_bins);
  bins.count.assign(num_bins, 0);
  bins.acc.assign(num_bins, 0.0);
  bins.conf.assign(num_bins, 0.0);
  for (std::size_t m = 0; m < num_bins; ++m) {
    bins.lo[m] = static_cast<double>(m) / static_cast<double>(num_bins);
    bins.hi[m] = static_cast<double>(m + 1) / static_cast<double>(num_bins);
  }
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0))
      throw std::invalid_argument("confidence outside [0, 1]");
    const std::size_t m = bin_index(c, num_bins);
    bins.count[m] += 1;
    bins.conf[m] += c;
    if (correct[i]) bins.acc[m] += 1.0;
  }
  for (std::size_t m = 0; m < num_bins; ++m) {
    if (bins.count[m] > 0) {
      bins.acc[m] /= static_cast<double>(bins.count[m]);
      bins.conf[m] /= static_cast<double>(bins.count[m]);
    }
  }
  return bins;
}

double ece_from_bins(const BinStats& bins) {
  std::size_t n = 0;
  for (std::size_t c : bins.count) n += c;
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t m = 0; m < bins.num_bins(); ++m)
    total += static_cast<double>(bins.count[m]) / static_cast<double>(n) *
             std::abs(bins.acc[m] - bins.conf[m]);
  return total;
}

double ece(std::span<const double> confidences, const std::vector<bool>& correct,
           std::size_t num_bins) {
  return ece_from_bins(reliability_bins(confidences, correct, num_bins));
}

std::vector<double> apply(const Recalibrator& recal, std::span<const double> z) {
  if (recal.kind == Recalibrator::Kind::temperature) {
    if (!(recal.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    std::vector<double> out(z.begin(), z.end());
    for (double& v : out) v /= recal.temperature;
    return out;
  }
  return logits(recal.platt, z);
}

namespace {

// The descent runs on the inverse temperature beta = 1/T (Platt's original
// scalar parametrization). The gradient d/dbeta of the log loss at beta*z
// scales with the logits themselves, which keeps the fixed small step count
// well conditioned even when the input model is strongly over- or
// under-confident.
double inverse_temperature_grad(std::span<const double> z, int label, double beta) {
  std::vector<double> scaled(z.begin(), z.end());
  for (double& v : scaled) v *= beta;
  const std::vector<double> p = softmax(scaled);
  double g = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double residual = p[k] - (static_cast<int>(k) == label ? 1.0 : 0.0);
    g += residual * z[k];
  }
  return g;
}

constexpr double kTemperatureLo = 1e-2;
constexpr double kTemperatureHi = 1e3;

}  // namespace

RecalFitResult fit_recalibrator(Recalibrator::Kind kind,
                                const std::vector<std::vector<double>>& logits_batch,
                                const std::vector<int>& labels, int num_classes,
                                const RecalFitOptions& options) {
  if (logits_batch.empty()) throw std::invalid_argument("empty recalibration split");
  if (logits_batch.size() != labels.size())
    throw std::invalid_argument("logits/labels length mismatch");
  const std::size_t n = logits_batch.size();

  DpSgdConfig step_cfg;
  step_cfg.clip_norm = options.clip_norm;
  step_cfg.noise_multiplier = options.noise_multiplier;
  step_cfg.expected_batch = n;
  step_cfg.mode =
      options.noise_multiplier > 0.0 ? TrainMode::dp : TrainMode::non_private;
  Rng rng(options.seed);

  Recalibrator recal;
  if (kind == Recalibrator::Kind::platt) {
    recal = Recalibrator::identity_platt(num_classes);
  }
  recal.kind = kind;

  // Full-batch descent: one step per epoch over the whole split.
  Dataset logit_data;
  if (kind == Recalibrator::Kind::platt) {
    logit_data.dim = num_classes;
    logit_data.num_classes = num_classes;
    logit_data.examples.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      logit_data.examples.push_back(Example{logits_batch[i], labels[i]});
  }

  double beta = 1.0 / recal.temperature;
  for (std::size_t step = 0; step < options.epochs; ++step) {
    const double lr = options.learning_rate *
                      (1.0 - static_cast<double>(step) /
                                 static_cast<double>(options.epochs));
    if (kind == Recalibrator::Kind::temperature) {
      std::vector<std::vector<double>> grads;
      grads.reserve(n);
      for (std::size_t i = 0; i < n; ++i)
        grads.push_back({inverse_temperature_grad(logits_batch[i], labels[i], beta)});
      const std::vector<double> update = noisy_update(grads, step_cfg, rng);
      beta = std::clamp(beta - lr * update[0], 1.0 / kTemperatureHi,
                        1.0 / kTemperatureLo);
      recal.temperature = 1.0 / beta;
    } else {
      const auto grads = loss_and_per_example_grads(recal.platt, logit_data.examples).second;
      const std::vector<double> update = noisy_update(grads, step_cfg, rng);
      std::vector<double> params = recal.platt.flatten();
      for (std::size_t j = 0; j < params.size(); ++j) params[j] -= lr * update[j];
      recal.platt = LinearModel::unflatten(params, num_classes, num_classes);
    }
  }

  RecalFitResult result{recal, PrivacyBudget::not_private()};
  if (options.noise_multiplier > 0.0) {
    result.spent = account({1.0, options.noise_multiplier, options.epochs}, options.delta);
  }
  return result;
}

CalibrationReport evaluate(const LinearModel& model,
                           const std::optional<Recalibrator>& recal,
                           const Dataset& data, std::size_t num_bins) {
  if (data.empty()) throw std::invalid_argument("empty evaluation dataset");
  std::vector<double> confidences(data.size());
  std::vector<bool> correct(data.size());
  double acc_sum = 0.0, conf_sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> z = logits(model, data.examples[i].features);
    if (recal) z = dpcal::apply(*recal, z);
    const std::vector<double> p = softmax(z);
    std::size_t best = 0;
    for (std::size_t k = 1; k < p.size(); ++k)
      if (p[k] > p[best]) best = k;
    confidences[i] = p[best];
    correct[i] = static_cast<int>(best) == data.examples[i].label;
    acc_sum += correct[i] ? 1.0 : 0.0;
    conf_sum += confidences[i];
  }
  CalibrationReport report;
  report.bins = reliability_bins(confidences, correct, num_bins);
  report.ece = ece_from_bins(report.bins);
  report.accuracy = acc_sum / static_cast<double>(data.size());
  report.mean_confidence = conf_sum / static_cast<double>(data.size());
  return report;
}

std::string report_to_json(const CalibrationReport& report) {
  nlohmann::json j;
  j["ece"] = report.ece;
  j["accuracy"] = report.accuracy;
  j["mean_confidence"] = report.mean_confidence;
  j["bins"] = nlohmann::json::array();
  for (std::size_t m = 0; m < report.bins.num_bins(); ++m) {
    j["bins"].push_back({{"lo", report.bins.lo[m]},
                         {"hi", report.bins.hi[m]},
                         {"count", report.bins.count[m]},
                         {"acc", report.bins.acc[m]},
                         {"conf", report.bins.conf[m]}});
  }
  return j.dump();
}

std::string bins_to_csv(const BinStats& bins) {
  std::ostringstream out;
  out.precision(17);
  out << "lo,hi,count,acc,conf\n";
  for (std::size_t m = 0; m < bins.num_bins(); ++m)
    out << bins.lo[m] << ',' << bins.hi[m] << ',' << bins.count[m] << ','
        << bins.acc[m] << ',' << bins.conf[m] << '\n';
  return out.str();
}

}  // namespace dpcal
