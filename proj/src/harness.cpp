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

#include "dpcal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace dpcal {

namespace {

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

struct SeedData {
  Dataset train;
  Dataset test;
};

SeedData make_seed_data(const ExperimentConfig& config, std::uint64_t seed) {
  SeedData data;
  if (config.feature_path) {
    const Dataset full = load_features(*config.feature_path);
    SplitPair split = random_split(full, 0.2, sub_seed(seed, 0));
    data.train = std::move(split.train);
    data.test = std::move(split.recal);
  } else {
    data.train = make_gaussian_mixture(config.synth_train_n, sub_seed(seed, 1));
    data.test = make_gaussian_mixture(config.synth_test_n, sub_seed(seed, 2));
  }
  return data;
}

std::size_t steps_per_epoch(std::size_t n, std::size_t batch) {
  return (n + batch - 1) / batch;
}

double sampling_rate(std::size_t n, std::size_t batch) {
  return std::min(1.0, static_cast<double>(batch) / static_cast<double>(n));
}

// Noise multiplier hitting the target budget over the full run.
double calibrated_sigma(const PrivacyBudget& target, std::size_t n,
                        const DpSgdConfig& cfg) {
  const double q = sampling_rate(n, cfg.expected_batch);
  const std::size_t total = cfg.epochs * steps_per_epoch(n, cfg.expected_batch);
  return calibrate_noise(target, q, total);
}

SeedResult train_arm(const SeedData& data, DpSgdConfig cfg,
                     const ExperimentConfig& config, std::uint64_t seed) {
  cfg.seed = sub_seed(seed, 5);
  const LinearModel init = LinearModel::zeros(data.train.num_classes, data.train.dim);
  TrainResult trained = train(init, data.train, cfg, data.test);

  SeedResult result;
  result.seed = seed;
  result.sigma = cfg.effective_sigma();
  result.budget = trained.spent;
  result.trace = std::move(trained.trace);
  result.report = evaluate(trained.model, std::nullopt, data.test, config.num_bins);
  return result;
}

// Tags any failure with the arm it happened in, so the CLI surfaces the
// failing arm name on stderr.
template <typename F>
auto with_arm(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error("arm " + name + ": " + e.what());
  }
}

nlohmann::json budget_to_json(const PrivacyBudget& b) {
  nlohmann::json j;
  j["private"] = b.is_private();
  j["epsilon"] = b.is_private() ? nlohmann::json(b.epsilon) : nlohmann::json("inf");
  j["delta"] = b.delta;
  return j;
}

nlohmann::json report_json(const CalibrationReport& r) {
  return nlohmann::json::parse(report_to_json(r));
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void ArmResult::finalize() {
  std::vector<double> eces, accs, confs;
  for (const SeedResult& s : per_seed) {
    eces.push_back(s.report.ece);
    accs.push_back(s.report.accuracy);
    confs.push_back(s.report.mean_confidence);
  }
  median_ece = median(eces);
  median_accuracy = median(accs);
  median_confidence = median(confs);
}

const ArmResult& ExperimentReport::arm(const std::string& name) const {
  for (const ArmResult& a : arms)
    if (a.name == name) return a;
  throw std::out_of_range("no experiment arm named " + name);
}

ExperimentReport run_fig1(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = "fig1";
  report.config = config;
  ArmResult non_private{"non_private"}, dp{"dp"};
  for (std::uint64_t seed : config.seeds) {
    const SeedData data = make_seed_data(config, seed);

    DpSgdConfig np_cfg = config.sgd;
    np_cfg.mode = TrainMode::non_private;
    non_private.per_seed.push_back(with_arm(
        non_private.name, [&] { return train_arm(data, np_cfg, config, seed); }));

    DpSgdConfig dp_cfg = config.sgd;
    dp_cfg.mode = TrainMode::dp;
    dp_cfg.noise_multiplier = with_arm(dp.name, [&] {
      return calibrated_sigma(config.target, data.train.size(), dp_cfg);
    });
    dp.per_seed.push_back(
        with_arm(dp.name, [&] { return train_arm(data, dp_cfg, config, seed); }));
  }
  non_private.finalize();
  dp.finalize();
  report.arms = {std::move(non_private), std::move(dp)};
  return report;
}

ExperimentReport run_clipping_ablation(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = "ablate-clip";
  report.config = config;
  for (double clip : config.clip_grid) {
    std::ostringstream name;
    name << "clip_" << clip;
    ArmResult arm{name.str()};
    for (std::uint64_t seed : config.seeds) {
      const SeedData data = make_seed_data(config, seed);
      DpSgdConfig cfg = config.sgd;
      cfg.mode = TrainMode::dp;
      cfg.clip_norm = clip;
      cfg.noise_multiplier = with_arm(arm.name, [&] {
        return calibrated_sigma(config.target, data.train.size(), cfg);
      });
      arm.per_seed.push_back(
          with_arm(arm.name, [&] { return train_arm(data, cfg, config, seed); }));
    }
    arm.finalize();
    report.arms.push_back(std::move(arm));
  }
  return report;
}

ExperimentReport run_noise_only_ablation(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = "ablate-noise";
  report.config = config;
  const TrainMode modes[] = {TrainMode::dp, TrainMode::clip_only, TrainMode::noise_only,
                             TrainMode::non_private};
  for (TrainMode mode : modes) {
    ArmResult arm{to_string(mode)};
    for (std::uint64_t seed : config.seeds) {
      const SeedData data = make_seed_data(config, seed);
      DpSgdConfig cfg = config.sgd;
      cfg.mode = mode;
      // noise_only keeps the noise level of the matched DP run
      if (mode == TrainMode::dp || mode == TrainMode::noise_only)
        cfg.noise_multiplier = with_arm(arm.name, [&] {
        return calibrated_sigma(config.target, data.train.size(), cfg);
      });
      arm.per_seed.push_back(
          with_arm(arm.name, [&] { return train_arm(data, cfg, config, seed); }));
    }
    arm.finalize();
    report.arms.push_back(std::move(arm));
  }
  return report;
}

ExperimentReport run_epsilon_sweep(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = "sweep-eps";
  report.config = config;
  for (double eps : config.epsilon_grid) {
    std::ostringstream name;
    name << "eps_" << eps;
    ArmResult arm{name.str()};
    for (std::uint64_t seed : config.seeds) {
      const SeedData data = make_seed_data(config, seed);
      DpSgdConfig cfg = config.sgd;
      cfg.mode = TrainMode::dp;
      cfg.noise_multiplier = with_arm(arm.name, [&] {
        return calibrated_sigma(PrivacyBudget(eps, config.target.delta),
                                data.train.size(), cfg);
      });
      arm.per_seed.push_back(
          with_arm(arm.name, [&] { return train_arm(data, cfg, config, seed); }));
    }
    arm.finalize();
    report.arms.push_back(std::move(arm));
  }
  ArmResult inf_arm{"eps_inf"};
  for (std::uint64_t seed : config.seeds) {
    const SeedData data = make_seed_data(config, seed);
    DpSgdConfig cfg = config.sgd;
    cfg.mode = TrainMode::non_private;
    inf_arm.per_seed.push_back(with_arm(
        inf_arm.name, [&] { return train_arm(data, cfg, config, seed); }));
  }
  inf_arm.finalize();
  report.arms.push_back(std::move(inf_arm));
  return report;
}

ExperimentReport run_recalibration(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = "recalibrate";
  report.config = config;
  ArmResult dp{"dp"}, dp_ts{"dp_ts"}, dp_ps{"dp_ps"}, np_ts{"nonprivate_ts"};

  for (std::uint64_t seed : config.seeds) {
    const SeedData data = make_seed_data(config, seed);
    const SplitPair split =
        random_split(data.train, config.validation_ratio, sub_seed(seed, 4));

    DpSgdConfig cfg = config.sgd;
    cfg.mode = TrainMode::dp;
    cfg.noise_multiplier = with_arm(dp.name, [&] {
      return calibrated_sigma(config.target, split.train.size(), cfg);
    });
    cfg.seed = sub_seed(seed, 5);
    const LinearModel init =
        LinearModel::zeros(split.train.num_classes, split.train.dim);
    TrainResult trained = with_arm(
        dp.name, [&] { return train(init, split.train, cfg, data.test); });

    SeedResult base;
    base.seed = seed;
    base.sigma = cfg.noise_multiplier;
    base.budget = trained.spent;
    base.trace = trained.trace;
    base.report = evaluate(trained.model, std::nullopt, data.test, config.num_bins);
    dp.per_seed.push_back(base);

    // Recalibration split logits
    std::vector<std::vector<double>> recal_logits;
    std::vector<int> recal_labels;
    recal_logits.reserve(split.recal.size());
    for (const Example& ex : split.recal.examples) {
      recal_logits.push_back(logits(trained.model, ex.features));
      recal_labels.push_back(ex.label);
    }

    RecalFitOptions private_opts;
    private_opts.seed = sub_seed(seed, 6);
    private_opts.delta = config.target.delta;
    private_opts.noise_multiplier = with_arm("dp_ts", [&] {
      return calibrate_noise(config.target, 1.0, private_opts.epochs);
    });

    RecalFitOptions np_opts = private_opts;
    np_opts.noise_multiplier = 0.0;

    const auto push_recal = [&](ArmResult& arm, Recalibrator::Kind kind,
                                const RecalFitOptions& opts) {
      const RecalFitResult fit = with_arm(arm.name, [&] {
        return fit_recalibrator(kind, recal_logits, recal_labels,
                                split.recal.num_classes, opts);
      });
      SeedResult r;
      r.seed = seed;
      r.sigma = cfg.noise_multiplier;
      r.budget = partition_compose(trained.spent, fit.spent);
      r.report = evaluate(trained.model, fit.recal, data.test, config.num_bins);
      arm.per_seed.push_back(std::move(r));
    };
    push_recal(dp_ts, Recalibrator::Kind::temperature, private_opts);
    push_recal(dp_ps, Recalibrator::Kind::platt, private_opts);
    push_recal(np_ts, Recalibrator::Kind::temperature, np_opts);
  }

  for (ArmResult* arm : {&dp, &dp_ts, &dp_ps, &np_ts}) arm->finalize();
  report.arms = {std::move(dp), std::move(dp_ts), std::move(dp_ps), std::move(np_ts)};
  return report;
}

ExperimentReport run_label_noise(const ExperimentConfig& config) {
  ExperimentReport report;
  report.kind = "label-noise";
  report.config = config;
  for (double p : config.label_noise_grid) {
    for (TrainMode mode : {TrainMode::dp, TrainMode::non_private}) {
      std::ostringstream name;
      name << to_string(mode) << "_p" << p;
      ArmResult arm{name.str()};
      for (std::uint64_t seed : config.seeds) {
        SeedData data = make_seed_data(config, seed);
        // corruption touches the training split only
        data.train = corrupt_labels(data.train, p, sub_seed(seed, 3));
        DpSgdConfig cfg = config.sgd;
        cfg.mode = mode;
        if (mode == TrainMode::dp)
          cfg.noise_multiplier = with_arm(arm.name, [&] {
            return calibrated_sigma(config.target, data.train.size(), cfg);
          });
        arm.per_seed.push_back(with_arm(
            arm.name, [&] { return train_arm(data, cfg, config, seed); }));
      }
      arm.finalize();
      report.arms.push_back(std::move(arm));
    }
  }
  return report;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  if (feature_path) j["feature_path"] = *feature_path;
  j["synth_train_n"] = synth_train_n;
  j["synth_test_n"] = synth_test_n;
  j["clip_norm"] = sgd.clip_norm;
  j["expected_batch"] = sgd.expected_batch;
  j["learning_rate"] = sgd.learning_rate;
  j["lr_decay"] = sgd.lr_decay;
  j["epochs"] = sgd.epochs;
  j["epsilon"] = target.epsilon;
  j["delta"] = target.delta;
  j["validation_ratio"] = validation_ratio;
  j["num_bins"] = num_bins;
  j["seeds"] = seeds;
  j["clip_grid"] = clip_grid;
  j["epsilon_grid"] = epsilon_grid;
  j["label_noise_grid"] = label_noise_grid;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig c;
  if (j.contains("feature_path")) c.feature_path = j["feature_path"].get<std::string>();
  c.synth_train_n = j.value("synth_train_n", c.synth_train_n);
  c.synth_test_n = j.value("synth_test_n", c.synth_test_n);
  c.sgd.clip_norm = j.value("clip_norm", c.sgd.clip_norm);
  c.sgd.expected_batch = j.value("expected_batch", c.sgd.expected_batch);
  c.sgd.learning_rate = j.value("learning_rate", c.sgd.learning_rate);
  c.sgd.lr_decay = j.value("lr_decay", c.sgd.lr_decay);
  c.sgd.epochs = j.value("epochs", c.sgd.epochs);
  c.target = PrivacyBudget(j.value("epsilon", c.target.epsilon),
                           j.value("delta", c.target.delta));
  c.validation_ratio = j.value("validation_ratio", c.validation_ratio);
  c.num_bins = j.value("num_bins", c.num_bins);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (c.seeds.empty()) throw std::invalid_argument("seeds list must be non-empty");
  if (j.contains("clip_grid")) c.clip_grid = j["clip_grid"].get<std::vector<double>>();
  if (j.contains("epsilon_grid"))
    c.epsilon_grid = j["epsilon_grid"].get<std::vector<double>>();
  if (j.contains("label_noise_grid"))
    c.label_noise_grid = j["label_noise_grid"].get<std::vector<double>>();
  return c;
}

std::string ExperimentReport::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["config"] = nlohmann::json::parse(config.to_json());
  j["arms"] = nlohmann::json::array();
  for (const ArmResult& arm : arms) {
    nlohmann::json a;
    a["name"] = arm.name;
    a["median_ece"] = arm.median_ece;
    a["median_accuracy"] = arm.median_accuracy;
    a["median_confidence"] = arm.median_confidence;
    a["per_seed"] = nlohmann::json::array();
    for (const SeedResult& s : arm.per_seed) {
      nlohmann::json e;
      e["seed"] = s.seed;
      e["sigma"] = s.sigma;
      e["budget"] = budget_to_json(s.budget);
      e["report"] = report_json(s.report);
      a["per_seed"].push_back(std::move(e));
    }
    j["arms"].push_back(std::move(a));
  }
  return j.dump(2);
}

std::vector<std::string> write_report(const ExperimentReport& report,
                                      const std::string& out_dir,
                                      const std::string& format) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  const auto emit = [&](const std::string& name, const std::string& body) {
    std::ofstream out(fs::path(out_dir) / name);
    if (!out) throw std::runtime_error("cannot write " + name + " in " + out_dir);
    out << body;
    written.push_back(name);
  };

  emit("report.json", report.to_json());
  for (const ArmResult& arm : report.arms) {
    for (const SeedResult& s : arm.per_seed) {
      std::ostringstream stem;
      stem << arm.name << "_seed" << s.seed;
      emit(stem.str() + "_reliability.csv", bins_to_csv(s.report.bins));

      std::ostringstream hist;
      hist.precision(17);
      hist << "lo,hi,count\n";
      for (std::size_t m = 0; m < s.report.bins.num_bins(); ++m)
        hist << s.report.bins.lo[m] << ',' << s.report.bins.hi[m] << ','
             << s.report.bins.count[m] << '\n';
      emit(stem.str() + "_histogram.csv", hist.str());

      if (!s.trace.empty()) emit(stem.str() + "_trace.jsonl", trace_to_jsonl(s.trace));
    }
  }
  if (format == "csv") {
    std::ostringstream summary;
    summary << "arm,median_ece,median_accuracy,median_confidence\n";
    for (const ArmResult& arm : report.arms)
      summary << arm.name << ',' << arm.median_ece << ',' << arm.median_accuracy
              << ',' << arm.median_confidence << '\n';
    emit("summary.csv", summary.str());
  }
  return written;
}

}  // namespace dpcal
