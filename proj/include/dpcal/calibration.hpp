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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpcal/dataset.hpp"
#include "dpcal/dpsgd.hpp"
#include "dpcal/math.hpp"
#include "dpcal/model.hpp"

namespace dpcal {

// Per-bin calibration statistics over M equal-width bins on [0, 1].
// Bins are right-closed except the first, which includes 0; a confidence of
// exactly 1.0 lands in the last bin.
struct BinStats {
  std::vector<double> lo, hi;
  std::vector<std::size_t> count;
  std::vector<double> acc;   // 0 for empty bins
  std::vector<double> conf;  // 0 for empty bins

  std::size_t num_bins() const { return count.size(); }
};

struct CalibrationReport {
  double ece = 0.0;
  double accuracy = 0.0;
  double mean_confidence = 0.0;
  BinStats bins;
};

struct Recalibrator {
  enum class Kind { temperature, platt };
  Kind kind = Kind::temperature;
  double temperature = 1.0;       // kind == temperature
  LinearModel platt;              // kind == platt; K x K weights on logits

  static Recalibrator identity_temperature() { return Recalibrator{}; }
  static Recalibrator identity_platt(int num_classes);
};

std::size_t bin_index(double confidence, std::size_t num_bins);

// Bin-weighted mean absolute gap between per-bin accuracy and confidence.
double ece(std::span<const double> confidences, const std::vector<bool>& correct,
           std::size_t num_bins);

BinStats reliability_bins(std::span<const double> confidences,
                          const std::vector<bool>& correct, std::size_t num_bins);

double ece_from_bins(const BinStats& bins);

// temperature: logits / T; platt: W * logits + offset.
std::vector<double> apply(const Recalibrator& recal, std::span<const double> logits);

struct RecalFitOptions {
  // Defaults mirror the private recalibration recipe: 100 epochs, learning
  // rate 0.1 with linear decay, clip norm 10, T initialized at 1.
  std::size_t epochs = 100;
  double learning_rate = 0.1;
  double clip_norm = 10.0;
  double noise_multiplier = 0.0;  // 0 selects the non-private full-batch path
  std::uint64_t seed = 0;
  double delta = kDefaultDelta;
};

struct RecalFitResult {
  Recalibrator recal;
  PrivacyBudget spent;
};

// Fits the recalibrator by minimizing log loss of softmax(apply(g, logits))
// with full-batch (noisy) gradient descent on the recalibration split.
RecalFitResult fit_recalibrator(Recalibrator::Kind kind,
                                const std::vector<std::vector<double>>& logits_batch,
                                const std::vector<int>& labels, int num_classes,
                                const RecalFitOptions& options);

CalibrationReport evaluate(const LinearModel& model,
                           const std::optional<Recalibrator>& recal,
                           const Dataset& data, std::size_t num_bins);

// {ece, accuracy, mean_confidence, bins: [{lo, hi, count, acc, conf}]}
std::string report_to_json(const CalibrationReport& report);
// One row per bin: lo,hi,count,acc,conf.
std::string bins_to_csv(const BinStats& bins);

}  // namespace dpcal
