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
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dpcal/accountant.hpp"
#include "dpcal/dataset.hpp"
#include "dpcal/model.hpp"
#include "dpcal/rng.hpp"

namespace dpcal {

enum class TrainMode { dp, non_private, clip_only, noise_only };

std::string to_string(TrainMode mode);
TrainMode train_mode_from_string(const std::string& name);

struct DpSgdConfig {
  double clip_norm = 0.1;          // C
  double noise_multiplier = 1.0;   // sigma
  std::size_t expected_batch = 4000;  // B; divisor of the noisy mean
  double learning_rate = 0.5;
  bool lr_decay = true;            // linear decay to 0 over total steps
  std::size_t epochs = 60;
  TrainMode mode = TrainMode::dp;
  std::uint64_t seed = 0;

  void validate() const;
  // Effective noise multiplier after mode overrides (clip_only forces 0).
  double effective_sigma() const;
  bool clipping_enabled() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double eval_loss = 0.0;
  double train_ece = 0.0;
  double eval_ece = 0.0;
  double eval_acc = 0.0;
};

using TrainTrace = std::vector<EpochRecord>;

// JSON lines, one record per epoch.
std::string trace_to_jsonl(const TrainTrace& trace);

// clip_C(g) = g * min(1, C / ||g||_2).
std::vector<double> clip_per_example(std::span<const double> grad, double clip_norm);

// Mean of (optionally clipped) gradients over the expected batch size plus
// i.i.d. Gaussian noise of per-coordinate std C * sigma / B.
std::vector<double> noisy_update(const std::vector<std::vector<double>>& per_example_grads,
                                 const DpSgdConfig& cfg, Rng& noise);

struct TrainResult {
  LinearModel model;
  TrainTrace trace;
  PrivacyBudget spent;
};

// Runs `epochs` of Poisson-sampled DP-SGD (Eq.-style update) over `data`,
// evaluating on `eval_data` each epoch. The spent budget comes from forward
// accounting; non-private and noise-only modes report a not-private sentinel.
TrainResult train(const LinearModel& init, const Dataset& data, const DpSgdConfig& cfg,
                  const Dataset& eval_data);

}  // namespace dpcal
