#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "psaug/adaptive_policy.hpp"
#include "psaug/engine.hpp"
#include "psaug/ibf.hpp"
#include "psaug/progressive_schedule.hpp"
#include "psaug/serialization.hpp"

namespace py = pybind11;
using namespace psaug;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

std::vector<FeatureMatrix> to_matrices(const std::vector<FloatArray>& arrays) {
  std::vector<FeatureMatrix> out;
  out.reserve(arrays.size());
  for (const auto& a : arrays) {
    if (a.ndim() != 2) throw py::value_error("feature arrays must be 2-D (frames, bins)");
    const auto frames = static_cast<std::size_t>(a.shape(0));
    const auto bins = static_cast<std::size_t>(a.shape(1));
    out.emplace_back(frames, bins, std::vector<float>(a.data(), a.data() + a.size()));
  }
  return out;
}

py::list to_arrays(const std::vector<FeatureMatrix>& matrices) {
  py::list out;
  for (const auto& m : matrices) {
    FloatArray a({m.frames(), m.bins()});
    std::copy(m.values().begin(), m.values().end(), a.mutable_data());
    out.append(std::move(a));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sample-adaptive spectrogram augmentation engine";
  m.attr("__version__") = PSAUG_MODULE_VERSION;

  m.def("default_config", [] { return config_to_json(EngineConfig{}).dump(); });

  m.def(
      "augment_batch",
      [](const std::vector<FloatArray>& features, const std::vector<double>& losses,
         std::uint64_t epoch, const std::string& config_json, std::uint64_t batch_index) {
        const auto matrices = to_matrices(features);
        const EngineConfig config = parse_config(config_json);
        BatchResult result;
        {
          py::gil_scoped_release release;
          result = augment_batch(matrices, losses, epoch, config, batch_index);
        }
        return py::make_tuple(to_arrays(result.features), report_to_jsonl(result.report));
      },
      py::arg("features"), py::arg("losses"), py::arg("epoch"), py::arg("config_json"),
      py::arg("batch_index") = 0);

  m.def(
      "replay_report",
      [](const std::vector<FloatArray>& features, const std::string& report_jsonl) {
        return to_arrays(replay_report(to_matrices(features), report_from_jsonl(report_jsonl)));
      },
      py::arg("features"), py::arg("report_jsonl"));

  m.def(
      "hybrid_normalize",
      [](const std::vector<double>& losses, const std::string& config_json) {
        const EngineConfig config = parse_config(config_json);
        return trace_to_json(hybrid_normalize(losses, config.ibf, config.clip_spread)).dump();
      },
      py::arg("losses"), py::arg("config_json"));

  m.def(
      "schedule_at",
      [](std::uint64_t epoch, const std::string& config_json) {
        return schedule_to_json(schedule_at(epoch, parse_config(config_json).schedule)).dump();
      },
      py::arg("epoch"), py::arg("config_json"));

  m.def(
      "regularized_ibf", [](double x, double s, double a) { return regularized_ibf(x, IbfParams{s, a}); },
      py::arg("x"), py::arg("s") = 2.0, py::arg("a") = 0.5);
}
