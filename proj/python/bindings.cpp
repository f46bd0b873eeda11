#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "codedbbo/experiment_config.hpp"

namespace py = pybind11;
using namespace codedbbo;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) {
    Matrix m(static_cast<std::size_t>(a.shape(0)), 1);
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, 0) = a.data()[r];
    return m;
  }
  if (a.ndim() != 2) throw std::invalid_argument("expected a 1-D or 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = *a.data(r, c);
  return m;
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Array to_array(const Vector& v) {
  Array out(v.size());
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Vector to_vector(const Array& a) { return Vector(a.data(), a.data() + a.size()); }

ErasedOutputs erased(const Array& values, const std::vector<bool>& available) {
  return ErasedOutputs{to_vector(values), available};
}

py::dict estimate_dict(const GradientEstimate& g) {
  py::dict d;
  d["values"] = to_array(g.values);
  d["method"] = std::string(to_string(g.method));
  d["n_outputs_used"] = g.n_outputs_used;
  d["decoded"] = g.decoded;
  return d;
}

ExperimentConfig config_from(const KeyValues& values, const std::filesystem::path& base_dir) {
  return resolve_config(values, {}, base_dir);
}

}  // namespace

PYBIND11_MODULE(_codedbbo, m) {
  m.doc() = "Coded black-box gradient estimation (C++ core)";

  auto not_decodable = py::register_exception<NotDecodableError>(m, "NotDecodableError", PyExc_RuntimeError);
  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  (void)not_decodable;
  (void)config_error;

  m.attr("CODEC_CONVENTION") = kCodecConvention;
  m.attr("TRACE_HEADER") = kTraceHeader;

  py::class_<CodeConfig>(m, "CodeConfig")
      .def_readonly("N", &CodeConfig::n_total)
      .def_readonly("d", &CodeConfig::n_params)
      .def_readonly("design_erasure", &CodeConfig::design_erasure)
      .def_readonly("z_values", &CodeConfig::z_values)
      .def_readonly("frozen_set", &CodeConfig::frozen_set)
      .def_readonly("info_channels", &CodeConfig::info_channels)
      .def_property_readonly("rate", &CodeConfig::rate)
      .def("__repr__", [](const CodeConfig& c) {
        return "CodeConfig(d=" + std::to_string(c.n_params) + ", N=" + std::to_string(c.n_total) + ")";
      });

  m.def("bec_channel_reliabilities", &bec_channel_reliabilities, py::arg("N"),
        py::arg("design_erasure") = kDefaultDesignErasure);
  m.def("build_config", &build_config, py::arg("d"), py::arg("N"), py::arg("design_erasure") = kDefaultDesignErasure);

  m.def(
      "encode", [](const CodeConfig& c, const Array& inputs) { return to_array(encode(c, to_matrix(inputs))); },
      py::arg("config"), py::arg("inputs"), "Butterfly transform of an N-row input block.");
  m.def(
      "directions",
      [](const CodeConfig& c, const Array& diag) { return to_array(make_direction_set(c, to_vector(diag)).directions); },
      py::arg("config"), py::arg("diag_signs"), "N x d matrix of worker directions.");
  m.def("check_decodability", &check_decodability, py::arg("config"), py::arg("available"));
  m.def(
      "decode",
      [](const CodeConfig& c, const Array& values, const std::vector<bool>& available) {
        return to_array(decode(c, erased(values, available)));
      },
      py::arg("config"), py::arg("values"), py::arg("available"));

  m.def(
      "es_gradient",
      [](const Array& outputs, const Array& directions, const std::vector<bool>& received) {
        return estimate_dict(es_gradient(to_vector(outputs), to_matrix(directions), received));
      },
      py::arg("outputs"), py::arg("directions"), py::arg("received"));
  m.def(
      "coded_gradient",
      [](const CodeConfig& c, const Array& diag, const Array& outputs, const std::vector<bool>& available) {
        return estimate_dict(coded_gradient(make_direction_set(c, to_vector(diag)), erased(outputs, available)));
      },
      py::arg("config"), py::arg("diag_signs"), py::arg("outputs"), py::arg("available"));
  m.def(
      "finite_difference_from_outputs",
      [](const Array& outputs, const std::vector<bool>& available) {
        return estimate_dict(finite_difference_from_outputs(erased(outputs, available)));
      },
      py::arg("outputs"), py::arg("available"));

  m.def(
      "run",
      [](const KeyValues& values, const std::filesystem::path& base_dir) {
        const auto config = config_from(values, base_dir);
        py::gil_scoped_release release;
        return format_trace(run_configured(config));
      },
      py::arg("config"), py::arg("base_dir") = std::filesystem::path{},
      "Run an experiment from key=value settings and return the CSV trace.");
  m.def(
      "echo_config", [](const KeyValues& values) { return echo_config(config_from(values, {})); },
      py::arg("config"));
  m.def("read_config_file", &read_config_file, py::arg("path"));
}
