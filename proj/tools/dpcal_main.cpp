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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dpcal/dataset.hpp"
#include "dpcal/harness.hpp"
#include "dpcal/model.hpp"

namespace {

dpcal::ExperimentConfig load_config(const std::string& config_path,
                                    const std::vector<std::uint64_t>& seeds) {
  dpcal::ExperimentConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open config: " + config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = dpcal::ExperimentConfig::from_json(buffer.str());
  }
  if (!seeds.empty()) config.seeds = seeds;
  return config;
}

int run_experiment(const std::string& kind, const std::string& config_path,
                   const std::vector<std::uint64_t>& seeds, const std::string& out_dir,
                   const std::string& format) {
  const dpcal::ExperimentConfig config = load_config(config_path, seeds);
  dpcal::ExperimentReport report;
  if (kind == "fig1")
    report = dpcal::run_fig1(config);
  else if (kind == "ablate-clip")
    report = dpcal::run_clipping_ablation(config);
  else if (kind == "ablate-noise")
    report = dpcal::run_noise_only_ablation(config);
  else if (kind == "sweep-eps")
    report = dpcal::run_epsilon_sweep(config);
  else if (kind == "recalibrate")
    report = dpcal::run_recalibration(config);
  else if (kind == "label-noise")
    report = dpcal::run_label_noise(config);
  else
    throw std::runtime_error("unknown experiment kind: " + kind);

  if (out_dir.empty()) {
    std::cout << report.to_json() << '\n';
  } else {
    dpcal::write_report(report, out_dir, format);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DP-SGD calibration toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format = "json", path, model_path;
  std::vector<std::uint64_t> seeds;
  std::size_t n = 10000, num_bins = 15;
  std::uint64_t seed = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seeds", seeds, "seed list override");
    cmd->add_option("--format", format, "json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* synth = app.add_subcommand("synth", "generate the synthetic mixture as CSV");
  synth->add_option("--n", n, "number of examples");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", path, "output CSV path")->required();

  for (const char* kind :
       {"fig1", "ablate-clip", "ablate-noise", "sweep-eps", "recalibrate", "label-noise"})
    add_common(app.add_subcommand(kind, std::string("run the ") + kind + " experiment"));

  CLI::App* eval = app.add_subcommand("evaluate", "calibration report for a checkpoint");
  eval->add_option("--model", model_path, "model checkpoint JSON")->required();
  eval->add_option("--data", path, "feature CSV")->required();
  eval->add_option("--bins", num_bins, "bin count");
  eval->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  const std::string kind = app.get_subcommands().front()->get_name();
  try {
    if (kind == "synth") {
      dpcal::save_features(dpcal::make_gaussian_mixture(n, seed), path);
      return 0;
    }
    if (kind == "evaluate") {
      std::ifstream in(model_path);
      if (!in) throw std::runtime_error("cannot open checkpoint: " + model_path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      const dpcal::LinearModel model = dpcal::model_from_json(buffer.str());
      const dpcal::Dataset data = dpcal::load_features(path);
      const dpcal::CalibrationReport report =
          dpcal::evaluate(model, std::nullopt, data, num_bins);
      if (out_dir.empty()) {
        std::cout << dpcal::report_to_json(report) << '\n';
      } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream out(std::filesystem::path(out_dir) / "report.json");
        out << dpcal::report_to_json(report) << '\n';
        std::ofstream rel(std::filesystem::path(out_dir) / "reliability.csv");
        rel << dpcal::bins_to_csv(report.bins);
      }
      return 0;
    }
    return run_experiment(kind, config_path, seeds, out_dir, format);
  } catch (const std::exception& e) {
    std::cerr << kind << ": " << e.what() << '\n';
    return 1;
  }
}
