#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "srf/dataset.hpp"
#include "srf/evaluation.hpp"
#include "srf/training.hpp"

namespace py = pybind11;
using namespace srf;

namespace {

using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

CArray to_numpy(const ComplexGrid& g) {
  CArray out({g.subcarriers(), g.symbols()});
  std::copy(g.values().begin(), g.values().end(), out.mutable_data());
  return out;
}

ComplexGrid from_numpy(const CArray& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-d complex array");
  const auto k = static_cast<std::size_t>(a.shape(0)), ns = static_cast<std::size_t>(a.shape(1));
  return ComplexGrid(k, ns, std::vector<cdouble>(a.data(), a.data() + k * ns));
}

Tensor tensor_from(const RArray& a) {
  Shape shape;
  for (py::ssize_t i = 0; i < a.ndim(); ++i) shape.push_back(static_cast<std::size_t>(a.shape(i)));
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

RArray numpy_from(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  RArray out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Channel simulation, classical estimators and the SisRafNet model";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("carrier_hz", &SimConfig::carrier_hz)
      .def_readwrite("subcarriers", &SimConfig::subcarriers)
      .def_readwrite("subcarrier_spacing_hz", &SimConfig::subcarrier_spacing_hz)
      .def_readwrite("symbols_per_slot", &SimConfig::symbols_per_slot)
      .def_readwrite("delay_spread_s", &SimConfig::delay_spread_s)
      .def_readwrite("velocity_mps", &SimConfig::velocity_mps)
      .def_readwrite("slots_per_realization", &SimConfig::slots_per_realization)
      .def_readwrite("seed", &SimConfig::seed)
      .def("max_doppler_hz", &SimConfig::max_doppler_hz);

  m.def("kmh_to_mps", &kmh_to_mps);

  m.def(
      "simulate",
      [](const std::string& profile, const SimConfig& config) {
        const auto r = simulate_realization(ChannelProfile::by_name(profile), config);
        py::list slots;
        for (const auto& s : r.slots) slots.append(to_numpy(s));
        return slots;
      },
      py::arg("profile"), py::arg("config"), "List of [K x N_s] complex slot grids for one realization.");

  py::class_<PilotPattern>(m, "PilotPattern")
      .def_readonly("name", &PilotPattern::name)
      .def_readonly("freq_indices", &PilotPattern::freq_indices)
      .def_readonly("sym_indices", &PilotPattern::sym_indices)
      .def("gather", [](const PilotPattern& p, const CArray& h) { return to_numpy(p.gather(from_numpy(h))); });
  m.def("pilot_pattern", &pilot_pattern, py::arg("name"), py::arg("subcarriers") = 240, py::arg("symbols") = 14);
  m.def("pilot_pattern_names", &pilot_pattern_names);

  m.def(
      "ls_at_pilots",
      [](const CArray& h, const PilotPattern& p, double snr_db, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        const auto obs = ls_at_pilots(from_numpy(h), p, snr_db, rng);
        return py::make_tuple(to_numpy(obs.ls), obs.noise_variance);
      },
      py::arg("h"), py::arg("pattern"), py::arg("snr_db"), py::arg("seed") = 0,
      "(pilot LS grid, noise variance) for one noisy observation.");
  m.def(
      "ls_interpolate",
      [](const CArray& pilots, const PilotPattern& p, std::size_t k, std::size_t ns) {
        return to_numpy(ls_interpolate(from_numpy(pilots), p, k, ns));
      },
      py::arg("pilots"), py::arg("pattern"), py::arg("subcarriers") = 240, py::arg("symbols") = 14);
  m.def("nmse", [](const CArray& est, const CArray& h) { return nmse(from_numpy(est), from_numpy(h)); });
  m.def("to_db", &to_db);

  py::class_<LmmseStats>(m, "LmmseStats")
      .def_readonly("estimated_from", &LmmseStats::estimated_from)
      .def("underdetermined", &LmmseStats::underdetermined)
      .def("estimate", [](const LmmseStats& s, const CArray& pilots, double sigma2) {
        return to_numpy(lmmse_estimate(s, from_numpy(pilots), sigma2));
      })
      .def("save", &LmmseStats::save)
      .def_static("load", &LmmseStats::load);
  m.def("fit_lmmse", [](const std::vector<CArray>& grids, const PilotPattern& p) {
    std::vector<ComplexGrid> owned;
    owned.reserve(grids.size());
    for (const auto& g : grids) owned.push_back(from_numpy(g));
    std::vector<const ComplexGrid*> ptrs;
    for (const auto& g : owned) ptrs.push_back(&g);
    return fit_lmmse(ptrs, p);
  });

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("input_freq", &ModelConfig::input_freq)
      .def_readwrite("input_sym", &ModelConfig::input_sym)
      .def_readwrite("output_freq", &ModelConfig::output_freq)
      .def_readwrite("output_sym", &ModelConfig::output_sym)
      .def_readwrite("front_channels", &ModelConfig::front_channels)
      .def_readwrite("kernel", &ModelConfig::kernel)
      .def_readwrite("gru_hidden", &ModelConfig::gru_hidden)
      .def_readwrite("head_channels", &ModelConfig::head_channels)
      .def_readwrite("tail_channels", &ModelConfig::tail_channels)
      .def("validate", &ModelConfig::validate)
      .def("for_pattern", &ModelConfig::for_pattern)
      .def("mega_flops", [](const ModelConfig& c) { return flop_count(c).mega_flops(); })
      .def("param_count", [](const ModelConfig& c) { return param_count(c); });

  py::class_<Model>(m, "Model")
      .def_static("build", &Model::build, py::arg("config"), py::arg("seed") = 1)
      .def_static("load", &Model::load)
      .def("save", &Model::save)
      .def_property_readonly("config", &Model::config)
      .def_property("input_scale", &Model::input_scale, &Model::set_input_scale)
      .def("parameter_count", &Model::parameter_count)
      .def(
          "predict", [](const Model& model, const RArray& x) { return numpy_from(model.predict(tensor_from(x))); },
          "One real-valued component: pilot grid in, full grid out.")
      .def("predict_complex",
           [](const Model& model, const CArray& pilots) { return to_numpy(model.predict_complex(from_numpy(pilots))); });

  m.def(
      "generate_dataset",
      [](const std::string& out_dir, std::size_t realizations, std::size_t slots, std::uint64_t seed, unsigned jobs) {
        SimConfig base;
        base.slots_per_realization = slots;
        base.seed = seed;
        generate_dataset(default_settings(), realizations, base, out_dir, jobs);
      },
      py::arg("out_dir"), py::arg("realizations") = 10, py::arg("slots") = 20, py::arg("seed") = 1,
      py::arg("jobs") = 1);
  m.def("load_dataset_split", [](const std::string& dir, const std::string& which) {
    const auto ds = load_dataset(dir);
    const auto& ids = which == "train" ? ds.manifest.split.train
                      : which == "val" ? ds.manifest.split.val
                                       : ds.manifest.split.test;
    py::list out;
    for (const auto* g : ds.slots(ids)) out.append(to_numpy(*g));
    return out;
  });

  m.attr("__version__") = SRF_VERSION;
}
