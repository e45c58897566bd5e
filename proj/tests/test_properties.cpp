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


#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"

using namespace tcentre;

namespace {

const PhysicalConstants kC{};

CrystalTensor paper() { return CrystalTensor::from(HyperfineTensor::paper()); }
Vec3 axis(int k) { return HyperfineTensor::paper().rotation().col(k); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("tcentre_props_" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tcentre");
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

}  // namespace

TEST_CASE("generators produce valid samples") {
  oracle::Gen gen(1);
  for (int k = 0; k < 200; ++k) {
    CHECK(gen.unit_vector().norm() == doctest::Approx(1.0));
    const Mat3 r = gen.rotation();
    CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0));
    CHECK(gen.spinor().norm() == doctest::Approx(1.0));
    const auto t = gen.tensor();
    CHECK(t.principal_mhz.cwiseAbs().maxCoeff() <= 6.0);
    const int i = gen.integer(2, 4);
    CHECK(i >= 2);
    CHECK(i <= 4);
  }
}

TEST_CASE("zero-field spectrum follows the sign-triple formula for random tensors") {
  oracle::Gen gen(100);
  for (int k = 0; k < 100; ++k) {
    const auto t = gen.tensor();
    const auto es = eigensystem(build_ground_hamiltonian(MagneticField(), CrystalTensor::from(t)));
    const auto want = oracle::zero_field_levels(t.principal_mhz);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(angular_to_mhz(es.values[i]) - want[i]) < 1e-10);
  }
}

TEST_CASE("Hamiltonian invariants: Hermitian, traceless, valid eigensystem") {
  oracle::Gen gen(101);
  for (int k = 0; k < 100; ++k) {
    const MagneticField b(gen.unit_vector() * gen.uniform(0.0, 3.0));
    const auto h = build_ground_hamiltonian(b, CrystalTensor::from(gen.tensor())).matrix();
    CHECK(hermiticity_error(h) <= 1e-12 * h.norm());
    CHECK(std::abs(h.trace()) < 1e-12 * h.norm());
    const auto es = eigensystem(h);
    CHECK((es.vectors.adjoint() * es.vectors - MatXc::Identity(4, 4)).norm() < 1e-10);
    CHECK((h * es.vectors - es.vectors * es.values.asDiagonal()).norm() < 1e-10 * h.norm());
    CHECK(std::is_sorted(es.values.data(), es.values.data() + 4));
  }
}

TEST_CASE("propagators are unitary and compose") {
  oracle::Gen gen(102);
  for (int k = 0; k < 50; ++k) {
    const auto h = build_ground_hamiltonian(MagneticField(gen.unit_vector() * gen.uniform(0, 0.01)),
                                            CrystalTensor::from(gen.tensor()));
    const double t1 = gen.uniform(0, 50e-9), t2 = gen.uniform(0, 50e-9);
    const MatXc u1 = propagator(h, t1), u2 = propagator(h, t2), u12 = propagator(h, t1 + t2);
    CHECK((u1.adjoint() * u1 - MatXc::Identity(4, 4)).norm() < 1e-10);
    CHECK((u1 * u2 - u12).norm() < 1e-9);
  }
}

TEST_CASE("spectra are invariant under a common rotation of field and tensor") {
  oracle::Gen gen(103);
  for (int k = 0; k < 100; ++k) {
    const Mat3 r = gen.rotation();
    const CrystalTensor a = CrystalTensor::from(gen.tensor());
    const Vec3 b = gen.unit_vector() * gen.uniform(0, 2.0);
    const auto e0 = eigensystem(build_ground_hamiltonian(MagneticField(b), a)).values;
    const auto e1 = eigensystem(build_ground_hamiltonian(MagneticField(r * b), a.rotated(r))).values;
    CHECK((e0 - e1).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, e0.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("transition multisets are invariant under cubic rotations") {
  oracle::Gen gen(104);
  for (const auto& r : cubic_rotations()) {
    const Vec3 b = gen.unit_vector() * 1e-3;
    const auto x = transition_frequencies(MagneticField(b), paper()).lines;
    const auto y = transition_frequencies(MagneticField(r * b), paper().rotated(r)).lines;
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(x[i].freq_mhz - y[i].freq_mhz) < 1e-9);
  }
}

TEST_CASE("trajectory average and master equation agree over a 3x3x3 sweep") {
  double worst = 0.0;
  for (double tau : {3e-9, 10e-9, 30e-9})
    for (double b : {0.2, 1.0, 2.0})
      for (const Vec3& d : {Vec3(0, 0, 1), Vec3(1, 1, 1).normalized(), Vec3(0.3, -0.5, 0.8).normalized()}) {
        CycleParams p;
        p.field = MagneticField(d * b);
        p.tensor = paper();
        p.tau_s = tau;
        p.t_s = 10 * tau;
        const double dist = trace_distance(cycle_density_matrix(p).rho, lindblad_oracle(p).rho);
        worst = std::max(worst, dist);
        CHECK(dist < 1e-6);
      }
  MESSAGE("largest trace distance " << worst);
}

TEST_CASE("flip probability does not decrease with evolution time") {
  oracle::Gen gen(105);
  for (int k = 0; k < 10; ++k) {
    CycleParams p;
    p.field = MagneticField(gen.unit_vector() * gen.uniform(0.2, 2.0));
    p.tensor = paper();
    p.tau_s = gen.uniform(5e-9, 50e-9);
    p.initial = InitialState::eigenstate(0);
    p.allow_short_time = true;
    double previous = 0.0;
    for (int i = 0; i <= 80; ++i) {
      p.t_s = 20 * p.tau_s * i / 80;
      const double pf = cycle_density_matrix(p).p_flip;
      CHECK(pf >= previous - 1e-13);
      previous = pf;
    }
  }
}

TEST_CASE("flip probability on the DPM falls monotonically with field") {
  std::vector<double> fields;
  for (int i = 0; i <= 12; ++i) fields.push_back(0.2 * std::pow(25.0, i / 12.0));
  for (double psi : {0.25 * oracle::kPi, 1.0, 2.5}) {
    const auto s = dpm_protection_scaling(paper(), fields, psi);
    for (std::size_t i = 1; i < s.p_flip.size(); ++i) CHECK(s.p_flip[i] < s.p_flip[i - 1]);
    MESSAGE("psi " << psi << ": P_flip ~ B^" << s.exponent);
    CHECK(s.exponent < 0.0);
  }
}

TEST_CASE("average correction halves the small-lifetime infidelity along every hyperfine axis") {
  for (int k = 0; k < 3; ++k) {
    CycleParams p;
    p.field = MagneticField(axis(k));
    p.tensor = paper();
    const double dh = kTwoPi * 1e6 * std::abs(delta_h(p.field, paper()));
    p.tau_s = 1e-3 / dh;
    p.t_s = 20 * p.tau_s;
    const auto out = corrected_outcome(p);
    CHECK((1 - out.fidelity) / (1 - out.corrected_fidelity) == doctest::Approx(2.0).epsilon(0.01));
  }
}

TEST_CASE("CLI reruns are byte-identical") {
  TempDir dir("rerun");
  const std::vector<std::vector<std::string>> commands{
      {"predict", "--B", "0mT:2mT:5@110"},
      {"synth", "--noise", "3kHz", "--seed", "11"},
      {"map", "--metric", "cyclicity", "--B", "1T", "--resolution", "7x9"},
      {"dpm", "--B", "1T", "--points", "24"},
  };
  for (const auto& cmd : commands) {
    std::vector<std::string> first = cmd, second = cmd;
    const auto a = dir.path / (cmd[0] + "_a.csv"), b = dir.path / (cmd[0] + "_b.csv");
    first.insert(first.end(), {"--out", a.string()});
    second.insert(second.end(), {"--out", b.string()});
    REQUIRE(run_cli(first) == 0);
    REQUIRE(run_cli(second) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK_FALSE(slurp(a).empty());
  }
  const auto data = dir.path / "synth_a.csv";
  const auto fa = dir.path / "fit_a.json", fb = dir.path / "fit_b.json";
  REQUIRE(run_cli({"fit", "--data", data.string(), "--out", fa.string()}) == 0);
  REQUIRE(run_cli({"fit", "--data", data.string(), "--out", fb.string()}) == 0);
  CHECK(slurp(fa) == slurp(fb));
}
