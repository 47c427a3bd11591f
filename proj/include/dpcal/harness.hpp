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
#include <optional>
#include <string>
#include <vector>

#include "dpcal/accountant.hpp"
#include "dpcal/calibration.hpp"
#include "dpcal/dataset.hpp"
#include "dpcal/dpsgd.hpp"

namespace dpcal {

struct ExperimentConfig {
  // Dataset source: a feature CSV path, or (when absent) the synthetic
  // 2D Gaussian mixture.
  std::optional<std::string> feature_path;
  std::size_t synth_train_n = 10000;
  std::size_t synth_test_n = 10000;

  DpSgdConfig sgd;                       // clip norm, batch, lr, epochs
  PrivacyBudget target{8.0, kDefaultDelta};
  double validation_ratio = 0.1;
  std::size_t num_bins = 15;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  std::vector<double> clip_grid{0.1, 1.0, 10.0};
  std::vector<double> epsilon_grid{1.0, 3.0, 8.0, 16.0};
  std::vector<double> label_noise_grid{0.6, 0.8};

  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
};

struct SeedResult {
  std::uint64_t seed = 0;
  CalibrationReport report;
  PrivacyBudget budget = PrivacyBudget::not_private();
  double sigma = 0.0;
  TrainTrace trace;
};

struct ArmResult {
  std::string name;
  std::vector<SeedResult> per_seed;
  double median_ece = 0.0;
  double median_accuracy = 0.0;
  double median_confidence = 0.0;

  void finalize();  // fills the medians from per_seed
};

struct ExperimentReport {
  std::string kind;
  ExperimentConfig config;
  std::vector<ArmResult> arms;

  const ArmResult& arm(const std::string& name) const;
  std::string to_json() const;
};

double median(std::vector<double> values);

ExperimentReport run_fig1(const ExperimentConfig& config);
ExperimentReport run_clipping_ablation(const ExperimentConfig& config);
ExperimentReport run_noise_only_ablation(const ExperimentConfig& config);
ExperimentReport run_epsilon_sweep(const ExperimentConfig& config);
ExperimentReport run_recalibration(const ExperimentConfig& config);
ExperimentReport run_label_noise(const ExperimentConfig& config);

// Writes report.json plus per-arm reliability/histogram CSVs and per-seed
// trace JSONL files; returns the file names written (the directory manifest).
std::vector<std::string> write_report(const ExperimentReport& report,
                                      const std::string& out_dir,
                                      const std::string& format = "json");

}  // namespace dpcal
