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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dpcal/accountant.hpp"
#include "dpcal/calibration.hpp"
#include "dpcal/dataset.hpp"
#include "dpcal/dpsgd.hpp"
#include "dpcal/harness.hpp"
#include "dpcal/model.hpp"

namespace py = pybind11;
using namespace dpcal;

PYBIND11_MODULE(_dpcal, m) {
  m.doc() = "Differentially private training and calibration toolkit";

  py::class_<Example>(m, "Example")
      .def(py::init([](std::vector<double> features, int label) {
             return Example{std::move(features), label};
           }),
           py::arg("features"), py::arg("label"))
      .def_readwrite("features", &Example::features)
      .def_readwrite("label", &Example::label);

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("examples", &Dataset::examples)
      .def_readwrite("num_classes", &Dataset::num_classes)
      .def_readwrite("dim", &Dataset::dim)
      .def("__len__", &Dataset::size)
      .def("validate", &Dataset::validate);

  py::class_<SplitPair>(m, "SplitPair")
      .def_readonly("train", &SplitPair::train)
      .def_readonly("recal", &SplitPair::recal);

  m.def("make_gaussian_mixture", &make_gaussian_mixture, py::arg("n"), py::arg("seed"));
  m.def("random_split", &random_split, py::arg("dataset"), py::arg("alpha"),
        py::arg("seed"));
  m.def("corrupt_labels", &corrupt_labels, py::arg("dataset"), py::arg("p"),
        py::arg("seed"));
  m.def("load_features", &load_features, py::arg("path"));
  m.def("save_features", &save_features, py::arg("dataset"), py::arg("path"));

  py::class_<PrivacyBudget>(m, "PrivacyBudget")
      .def(py::init<double, double>(), py::arg("epsilon"), py::arg("delta"))
      .def_static("not_private", &PrivacyBudget::not_private)
      .def_readonly("epsilon", &PrivacyBudget::epsilon)
      .def_readonly("delta", &PrivacyBudget::delta)
      .def("is_private", &PrivacyBudget::is_private);

  py::class_<RdpCurve>(m, "RdpCurve")
      .def_readonly("orders", &RdpCurve::orders)
      .def_readonly("values", &RdpCurve::values);

  m.def("default_rdp_orders", [] { return default_rdp_orders(); });
  m.def("rdp_subsampled_gaussian", &rdp_subsampled_gaussian, py::arg("q"),
        py::arg("sigma"), py::arg("orders"));
  m.def("compose_steps", &compose_steps, py::arg("curve"), py::arg("steps"));
  m.def("rdp_to_dp", &rdp_to_dp, py::arg("curve"), py::arg("delta"));
  m.def(
      "calibrate_noise",
      [](const PrivacyBudget& target, double q, std::size_t steps) {
        return calibrate_noise(target, q, steps);
      },
      py::arg("target"), py::arg("q"), py::arg("steps"));
  m.def("partition_compose", &partition_compose, py::arg("a"), py::arg("b"));

  py::class_<LinearModel>(m, "LinearModel")
      .def_static("zeros", &LinearModel::zeros, py::arg("num_classes"), py::arg("dim"))
      .def_readwrite("num_classes", &LinearModel::num_classes)
      .def_readwrite("dim", &LinearModel::dim)
      .def_readwrite("weights", &LinearModel::weights)
      .def_readwrite("bias", &LinearModel::bias);

  m.def("logits", [](const LinearModel& model, const std::vector<double>& x) {
    return logits(model, x);
  });
  m.def("predict", [](const LinearModel& model, const std::vector<double>& x) {
    return predict(model, x);
  });
  m.def("model_to_json", &model_to_json);
  m.def("model_from_json", &model_from_json);

  py::enum_<TrainMode>(m, "TrainMode")
      .value("dp", TrainMode::dp)
      .value("non_private", TrainMode::non_private)
      .value("clip_only", TrainMode::clip_only)
      .value("noise_only", TrainMode::noise_only);

  py::class_<DpSgdConfig>(m, "DpSgdConfig")
      .def(py::init<>())
      .def_readwrite("clip_norm", &DpSgdConfig::clip_norm)
      .def_readwrite("noise_multiplier", &DpSgdConfig::noise_multiplier)
      .def_readwrite("expected_batch", &DpSgdConfig::expected_batch)
      .def_readwrite("learning_rate", &DpSgdConfig::learning_rate)
      .def_readwrite("lr_decay", &DpSgdConfig::lr_decay)
      .def_readwrite("epochs", &DpSgdConfig::epochs)
      .def_readwrite("mode", &DpSgdConfig::mode)
      .def_readwrite("seed", &DpSgdConfig::seed);

  py::class_<EpochRecord>(m, "EpochRecord")
      .def_readonly("epoch", &EpochRecord::epoch)
      .def_readonly("train_loss", &EpochRecord::train_loss)
      .def_readonly("eval_loss", &EpochRecord::eval_loss)
      .def_readonly("train_ece", &EpochRecord::train_ece)
      .def_readonly("eval_ece", &EpochRecord::eval_ece)
      .def_readonly("eval_acc", &EpochRecord::eval_acc);

  m.def("clip_per_example",
        [](const std::vector<double>& grad, double clip_norm) {
          return clip_per_example(grad, clip_norm);
        },
        py::arg("grad"), py::arg("clip_norm"));

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("trace", &TrainResult::trace)
      .def_readonly("spent", &TrainResult::spent);

  m.def("train", &train, py::arg("init"), py::arg("data"), py::arg("cfg"),
        py::arg("eval_data"));

  m.def("softmax", [](const std::vector<double>& z) { return softmax(z); });
  m.def("ece", [](const std::vector<double>& confidences,
                  const std::vector<bool>& correct, std::size_t num_bins) {
    return ece(confidences, correct, num_bins);
  });

  py::class_<BinStats>(m, "BinStats")
      .def_readonly("lo", &BinStats::lo)
      .def_readonly("hi", &BinStats::hi)
      .def_readonly("count", &BinStats::count)
      .def_readonly("acc", &BinStats::acc)
      .def_readonly("conf", &BinStats::conf);

  py::class_<CalibrationReport>(m, "CalibrationReport")
      .def_readonly("ece", &CalibrationReport::ece)
      .def_readonly("accuracy", &CalibrationReport::accuracy)
      .def_readonly("mean_confidence", &CalibrationReport::mean_confidence)
      .def_readonly("bins", &CalibrationReport::bins);

  py::enum_<Recalibrator::Kind>(m, "RecalKind")
      .value("temperature", Recalibrator::Kind::temperature)
      .value("platt", Recalibrator::Kind::platt);

  py::class_<Recalibrator>(m, "Recalibrator")
      .def_readonly("kind", &Recalibrator::kind)
      .def_readonly("temperature", &Recalibrator::temperature)
      .def_readonly("platt", &Recalibrator::platt);

  py::class_<RecalFitOptions>(m, "RecalFitOptions")
      .def(py::init<>())
      .def_readwrite("epochs", &RecalFitOptions::epochs)
      .def_readwrite("learning_rate", &RecalFitOptions::learning_rate)
      .def_readwrite("clip_norm", &RecalFitOptions::clip_norm)
      .def_readwrite("noise_multiplier", &RecalFitOptions::noise_multiplier)
      .def_readwrite("seed", &RecalFitOptions::seed)
      .def_readwrite("delta", &RecalFitOptions::delta);

  py::class_<RecalFitResult>(m, "RecalFitResult")
      .def_readonly("recal", &RecalFitResult::recal)
      .def_readonly("spent", &RecalFitResult::spent);

  m.def("fit_recalibrator", &fit_recalibrator, py::arg("kind"), py::arg("logits"),
        py::arg("labels"), py::arg("num_classes"), py::arg("options"));
  m.def("apply_recalibrator",
        [](const Recalibrator& recal, const std::vector<double>& z) {
          return dpcal::apply(recal, z);
        });
  m.def(
      "evaluate",
      [](const LinearModel& model, const Recalibrator* recal, const Dataset& data,
         std::size_t num_bins) {
        std::optional<Recalibrator> opt;
        if (recal) opt = *recal;
        return evaluate(model, opt, data, num_bins);
      },
      py::arg("model"), py::arg("recal"), py::arg("data"), py::arg("num_bins") = 15);
  m.def("report_to_json", &report_to_json);
}
