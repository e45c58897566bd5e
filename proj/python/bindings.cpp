// Copyright 2026 The tcentre Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "tcentre/decoherence.hpp"
#include "tcentre/io.hpp"
#include "tcentre/orientations.hpp"
#include "tcentre/spectra.hpp"
#include "tcentre/tensor_fit.hpp"

namespace py = pybind11;
using namespace tcentre;

namespace {

ResonanceDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw py::value_error("cannot open " + path);
  return ResonanceDataset::read_csv(in);
}

void write_dataset(const ResonanceDataset& d, const std::string& path) {
  std::ostringstream s;
  d.write_csv(s);
  atomic_write(path, s.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "T centre hydrogen hyperfine and spin-photon memory model";
  m.attr("__version__") = library_version();

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<UnderdeterminedFitError>(m, "UnderdeterminedFitError", PyExc_RuntimeError);

  py::class_<PhysicalConstants>(m, "PhysicalConstants")
      .def(py::init<>())
      .def_readwrite("g_e", &PhysicalConstants::g_e)
      .def_readwrite("g_n", &PhysicalConstants::g_n)
      .def_property_readonly("gamma_e", &PhysicalConstants::gamma_e)
      .def_property_readonly("gamma_n", &PhysicalConstants::gamma_n);

  py::class_<HyperfineTensor>(m, "HyperfineTensor")
      .def(py::init([](const Vec3& principal_mhz, const Vec3& euler_deg) {
             return HyperfineTensor{principal_mhz, euler_deg};
           }),
           py::arg("principal_mhz"), py::arg("euler_deg") = Vec3(135.0, 90.0, -45.0))
      .def_readwrite("principal_mhz", &HyperfineTensor::principal_mhz)
      .def_readwrite("euler_deg", &HyperfineTensor::euler_deg)
      .def("rotation", &HyperfineTensor::rotation)
      .def("crystal_mhz", &HyperfineTensor::crystal_mhz)
      .def_static("paper", &HyperfineTensor::paper)
      .def_static("dft", &HyperfineTensor::dft)
      .def_static("isotropic", &HyperfineTensor::isotropic, py::arg("a_mhz"))
      .def("__repr__", [](const HyperfineTensor& t) { return "HyperfineTensor(" + to_json(t).dump() + ")"; });

  py::class_<CrystalTensor>(m, "CrystalTensor")
      .def(py::init(&CrystalTensor::from))
      .def_static("from_mhz", &CrystalTensor::from_mhz)
      .def("mhz", &CrystalTensor::mhz)
      .def("rotated", &CrystalTensor::rotated);
  py::implicitly_convertible<HyperfineTensor, CrystalTensor>();

  py::class_<MagneticField>(m, "MagneticField")
      .def(py::init<>())
      .def(py::init<const Vec3&>(), py::arg("tesla"))
      .def_static("spherical", &MagneticField::spherical, py::arg("magnitude_t"), py::arg("theta_rad"),
                  py::arg("phi_rad"))
      .def_static("along", &MagneticField::along, py::arg("direction"), py::arg("magnitude_t"))
      .def_property_readonly("tesla", &MagneticField::tesla)
      .def_property_readonly("magnitude", &MagneticField::magnitude)
      .def_property_readonly("theta", &MagneticField::theta)
      .def_property_readonly("phi", &MagneticField::phi);

  py::enum_<Branch>(m, "Branch").value("Up", Branch::Up).value("Down", Branch::Down);

  m.def(
      "ground_levels_mhz",
      [](const MagneticField& b, const CrystalTensor& a, const PhysicalConstants& c) {
        Eigen::VectorXd v = eigensystem(build_ground_hamiltonian(b, a, c)).values;
        return Eigen::VectorXd(v / mhz_to_angular(1.0));
      },
      py::arg("field"), py::arg("tensor"), py::arg("constants") = PhysicalConstants{});

  py::class_<Transition>(m, "Transition")
      .def_readonly("freq_mhz", &Transition::freq_mhz)
      .def_readonly("lower", &Transition::lower)
      .def_readonly("upper", &Transition::upper)
      .def_readonly("orientation", &Transition::orientation);

  m.def(
      "transition_frequencies",
      [](const MagneticField& b, const CrystalTensor& a, const PhysicalConstants& c) {
        return transition_frequencies(b, a, c).lines;
      },
      py::arg("field"), py::arg("tensor"), py::arg("constants") = PhysicalConstants{});

  m.def("orientation_labels", [] {
    std::vector<std::string> labels;
    for (const auto& o : orientation_set()) labels.push_back(o.label);
    return labels;
  });
  m.def("tensor_for_orientation",
        [](const CrystalTensor& z0, const std::string& label) {
          const auto i = orientation_index(label);
          if (!i) throw py::value_error("unknown orientation " + label);
          return tensor_for_orientation(z0, orientation_set()[*i]);
        },
        py::arg("tensor"), py::arg("label"));
  m.def(
      "partition_by_field",
      [](const Vec3& direction, const CrystalTensor& z0, double magnitude_t, double tolerance_mhz) {
        return partition_by_field(direction, z0, magnitude_t, tolerance_mhz).classes;
      },
      py::arg("direction"), py::arg("tensor"), py::arg("magnitude_t"), py::arg("tolerance_mhz") = 1e-3);

  py::class_<EffectiveHyperfine>(m, "EffectiveHyperfine")
      .def_readonly("a_eff_mhz", &EffectiveHyperfine::a_eff_mhz)
      .def_readonly("delta_e_mhz", &EffectiveHyperfine::delta_e_mhz)
      .def_readonly("splitting_up_mhz", &EffectiveHyperfine::splitting_up_mhz)
      .def_readonly("splitting_down_mhz", &EffectiveHyperfine::splitting_down_mhz);
  m.def(
      "effective_hyperfine",
      [](const MagneticField& b, const CrystalTensor& a) { return effective_hyperfine(b, a); },
      py::arg("field"), py::arg("tensor"));
  m.def(
      "delta_h", [](const MagneticField& b, const CrystalTensor& a, Branch ref) { return delta_h(b, a, ref); },
      py::arg("field"), py::arg("tensor"), py::arg("reference") = Branch::Up);

  py::class_<ResonanceDataset>(m, "ResonanceDataset")
      .def_static("read_csv", &read_dataset, py::arg("path"))
      .def("write_csv", &write_dataset, py::arg("path"))
      .def("__len__", [](const ResonanceDataset& d) { return d.records.size(); })
      .def_property_readonly("freq_mhz", [](const ResonanceDataset& d) {
        std::vector<double> f;
        for (const auto& r : d.records) f.push_back(r.freq_mhz);
        return f;
      });

  m.def("odmr_field_grid", &odmr_field_grid);
  m.def(
      "synthesize_dataset",
      [](const HyperfineTensor& t, std::optional<std::vector<MagneticField>> fields, double noise_mhz,
         double sigma_mhz, std::uint64_t seed, bool with_subsets, bool with_pairs) {
        return synthesize_dataset(t, fields ? *fields : odmr_field_grid(), noise_mhz, sigma_mhz, seed, with_subsets,
                                  with_pairs);
      },
      py::arg("tensor"), py::arg("fields") = py::none(), py::arg("noise_mhz") = 0.0, py::arg("sigma_mhz") = 3e-3,
      py::arg("seed") = 0, py::arg("with_subsets") = true, py::arg("with_pairs") = false);

  py::class_<DegenerateSolution>(m, "DegenerateSolution")
      .def_readonly("tensor", &DegenerateSolution::tensor)
      .def_readonly("chi2", &DegenerateSolution::chi2);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("tensor", &FitResult::tensor)
      .def_readonly("parameter_names", &FitResult::parameter_names)
      .def_readonly("parameters", &FitResult::parameters)
      .def_readonly("covariance", &FitResult::covariance)
      .def_readonly("principal_sigma_mhz", &FitResult::principal_sigma_mhz)
      .def_readonly("euler_sigma_deg", &FitResult::euler_sigma_deg)
      .def_readonly("chi2", &FitResult::chi2)
      .def_readonly("reduced_chi2", &FitResult::reduced_chi2)
      .def_readonly("rms_mhz", &FitResult::rms_mhz)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("degenerate", &FitResult::degenerate)
      .def_readonly("warnings", &FitResult::warnings)
      .def("to_json", [](const FitResult& r) { return to_json(r).dump(); });

  m.def(
      "fit_tensor",
      [](const ResonanceDataset& d, std::optional<HyperfineTensor> init, bool fit_euler, bool absolute_sigma) {
        FitOptions o;
        o.fit_euler = fit_euler;
        o.scale_by_reduced_chi2 = !absolute_sigma;
        py::gil_scoped_release release;
        return fit_tensor(d, init, o);
      },
      py::arg("data"), py::arg("init") = py::none(), py::arg("fit_euler") = false,
      py::arg("absolute_sigma") = false);

  py::class_<InitialState>(m, "InitialState")
      .def_static("superposition", &InitialState::superposition)
      .def_static("eigenstate", &InitialState::eigenstate, py::arg("index"))
      .def_static("product", &InitialState::product, py::arg("nuclear"));

  py::class_<CycleParams>(m, "CycleParams")
      .def(py::init([](const MagneticField& b, const CrystalTensor& a, double tau_s, double t_s, Branch electron,
                       const InitialState& initial, bool allow_short_time) {
             CycleParams p;
             p.field = b;
             p.tensor = a;
             p.tau_s = tau_s;
             p.t_s = t_s;
             p.electron = electron;
             p.initial = initial;
             p.allow_short_time = allow_short_time;
             return p;
           }),
           py::arg("field"), py::arg("tensor"), py::arg("tau_s") = 10e-9, py::arg("t_s") = 100e-9,
           py::arg("electron") = Branch::Up, py::arg("initial") = InitialState::superposition(),
           py::arg("allow_short_time") = false)
      .def_readwrite("tau_s", &CycleParams::tau_s)
      .def_readwrite("t_s", &CycleParams::t_s);

  py::class_<CycleOutcome>(m, "CycleOutcome")
      .def_readonly("rho", &CycleOutcome::rho)
      .def_readonly("rho_nuclear", &CycleOutcome::rho_nuclear)
      .def_readonly("p_flip", &CycleOutcome::p_flip)
      .def_readonly("fidelity", &CycleOutcome::fidelity)
      .def_readonly("purity", &CycleOutcome::purity)
      .def_readonly("mean_phase", &CycleOutcome::mean_phase);

  py::class_<CorrectedOutcome>(m, "CorrectedOutcome")
      .def_readonly("fidelity", &CorrectedOutcome::fidelity)
      .def_readonly("corrected_fidelity", &CorrectedOutcome::corrected_fidelity)
      .def_readonly("p_flip", &CorrectedOutcome::p_flip)
      .def_readonly("corrected_p_flip", &CorrectedOutcome::corrected_p_flip)
      .def_readonly("u_corr", &CorrectedOutcome::u_corr);

  m.def("cycle_density_matrix", &cycle_density_matrix, py::arg("params"));
  m.def("lindblad_oracle", &lindblad_oracle, py::arg("params"));
  m.def("corrected_outcome", &corrected_outcome, py::arg("params"));
  m.def("cyclicity", &cyclicity, py::arg("params"));
  m.def("detection_feedback_fidelity", &detection_feedback_fidelity, py::arg("params"),
        py::arg("detection_fraction"), py::arg("samples") = 64);
  m.def("trace_distance", &trace_distance);
  m.def(
      "flip_probability_limit",
      [](const MagneticField& b, const CrystalTensor& a) {
        return flip_probability_limit(effective_field_geometry(b, a));
      },
      py::arg("field"), py::arg("tensor"));

  py::class_<DpmContour>(m, "DpmContour")
      .def_readonly("exists", &DpmContour::exists)
      .def_readonly("axis", &DpmContour::axis)
      .def_readonly("curves", &DpmContour::curves)
      .def_readonly("max_delta_e_mhz", &DpmContour::max_delta_e_mhz)
      .def_readonly("max_delta_e_direction", &DpmContour::max_delta_e_direction);
  m.def(
      "dpm_contour", [](const CrystalTensor& a, double b, int resolution) { return dpm_contour(a, b, resolution); },
      py::arg("tensor"), py::arg("magnitude_t"), py::arg("resolution") = 180);

  m.def(
      "map_over_directions",
      [](const CrystalTensor& a, const std::string& metric, double magnitude_t, double tau_s, double t_s, int n_theta,
         int n_phi, unsigned threads) {
        const auto parsed = parse_map_metric(metric);
        if (!parsed) throw py::value_error("unknown metric " + metric);
        MapRequest r;
        r.metric = *parsed;
        r.b_magnitude_t = magnitude_t;
        r.tau_s = tau_s;
        r.t_s = t_s;
        r.n_theta = n_theta;
        r.n_phi = n_phi;
        r.threads = threads;
        DirectionMap map;
        {
          py::gil_scoped_release release;
          map = map_over_directions(a, r);
        }
        py::array_t<double> values({map.theta.size(), map.phi.size()});
        std::copy(map.values.begin(), map.values.end(), values.mutable_data());
        return py::make_tuple(map.theta, map.phi, values);
      },
      py::arg("tensor"), py::arg("metric"), py::arg("magnitude_t") = 1.0, py::arg("tau_s") = 10e-9,
      py::arg("t_s") = 100e-9, py::arg("n_theta") = 91, py::arg("n_phi") = 180, py::arg("threads") = 0);
}
