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

#include "oracles.hpp"

using namespace tcentre;

namespace {

std::vector<double> levels_mhz(const Eigensystem& es) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) out.push_back(angular_to_mhz(es.values[k]));
  return out;
}

const PhysicalConstants kC{};

}  // namespace

TEST_CASE("constants have the expected signs and hydrogen Larmor frequency") {
  CHECK(kC.gamma_e() < 0.0);
  CHECK(kC.gamma_n() > 0.0);
  // g_n mu_N / h at 1 T, evaluated by hand from CODATA values.
  const double larmor_mhz = 5.585 * 5.0507837461e-27 / (2.0 * 3.14159265358979 * 1.054571817e-34) / 1e6;
  CHECK(angular_to_mhz(kC.gamma_n()) == doctest::Approx(larmor_mhz).epsilon(1e-12));
  CHECK(angular_to_mhz(kC.gamma_n()) == doctest::Approx(42.5722).epsilon(1e-5));
}

TEST_CASE("hyperfine tensor rotation preserves the principal values") {
  const auto t = HyperfineTensor::paper();
  const Mat3 m = t.crystal_mhz();
  CHECK((m - m.transpose()).norm() < 1e-12 * 4.499);
  const auto ev = oracle::jacobi_symmetric(m);
  CHECK(ev[0] == doctest::Approx(-4.499).epsilon(1e-12));
  CHECK(ev[1] == doctest::Approx(-2.927).epsilon(1e-12));
  CHECK(ev[2] == doctest::Approx(4.037).epsilon(1e-12));
  const Mat3 r = t.rotation();
  CHECK(r.determinant() == doctest::Approx(1.0));
  CHECK((r.transpose() * r - Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("Euler convention is Z(gamma) Y(beta) Z(alpha)") {
  const double a = 0.3, b = 1.1, g = -0.7;
  const Mat3 expect = (Eigen::AngleAxisd(g, Vec3::UnitZ()) * Eigen::AngleAxisd(b, Vec3::UnitY()) *
                       Eigen::AngleAxisd(a, Vec3::UnitZ()))
                          .toRotationMatrix();
  CHECK((euler_zyz(a, b, g) - expect).norm() < 1e-14);
}

TEST_CASE("non-symmetric tensors are rejected") {
  Mat3 m = Mat3::Identity();
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(CrystalTensor::from_mhz(m), InvalidTensorError);
}

TEST_CASE("magnetic field spherical round trip") {
  oracle::Gen gen(11);
  for (int k = 0; k < 50; ++k) {
    const Vec3 v = gen.unit_vector() * gen.uniform(1e-4, 3.0);
    const MagneticField b(v);
    const auto back = MagneticField::spherical(b.magnitude(), b.theta(), b.phi());
    CHECK((back.tesla() - v).norm() < 1e-12);
  }
  const auto z = MagneticField::along(Vec3(0, 0, 2), 1.0);
  CHECK(z.theta() == doctest::Approx(0.0));
  CHECK((MagneticField::spherical(1.0, oracle::kPi / 2, 0.0).tesla() - Vec3::UnitX()).norm() < 1e-15);
}

TEST_CASE("isotropic zero-field spectrum is triplet plus singlet") {
  const double a = 3.0;
  const auto es = eigensystem(build_ground_hamiltonian(MagneticField(), CrystalTensor::from(HyperfineTensor::isotropic(a))));
  const auto l = levels_mhz(es);
  CHECK(l[0] == doctest::Approx(-0.75 * a));
  for (int k = 1; k < 4; ++k) CHECK(l[k] == doctest::Approx(0.25 * a));
}

TEST_CASE("zero-field levels of the measured tensor") {
  const auto es = eigensystem(build_ground_hamiltonian(MagneticField(), CrystalTensor::from(HyperfineTensor::paper())));
  const auto l = levels_mhz(es);
  const auto expect = oracle::zero_field_levels(HyperfineTensor::paper().principal_mhz);
  for (int k = 0; k < 4; ++k) CHECK(l[k] == doctest::Approx(expect[k]).epsilon(1e-12));
  CHECK(l[0] == doctest::Approx(-2.86575));
  CHECK(l[1] == doctest::Approx(0.61625));
  CHECK(l[2] == doctest::Approx(0.84725));
  CHECK(l[3] == doctest::Approx(1.40225));
  CHECK(l[1] - l[0] == doctest::Approx(3.482).epsilon(1e-3));
  CHECK(l[2] - l[0] == doctest::Approx(3.713).epsilon(1e-3));
  CHECK(l[3] - l[0] == doctest::Approx(4.268).epsilon(1e-3));
}

TEST_CASE("ground Hamiltonian matches the explicit Kronecker construction") {
  const auto a = CrystalTensor::from(HyperfineTensor::paper());
  const MagneticField b(Vec3(0, 0, 1.0));
  const MatXc h = build_ground_hamiltonian(b, a).matrix();
  const MatXc ref = oracle::ground_hamiltonian(b.tesla(), a.angular(), kC);
  CHECK((h - ref).norm() < 1e-12 * ref.norm());
  CHECK(std::abs(h.trace()) < 1e-12 * ref.norm());
  const auto got = eigensystem(h).values;
  const auto want = oracle::hermitian_eigenvalues(ref);
  for (int k = 0; k < 4; ++k) CHECK(got[k] == doctest::Approx(want[k]).epsilon(1e-10));
}

TEST_CASE("excited nuclear Hamiltonian") {
  CHECK(build_excited_nuclear_hamiltonian(MagneticField()).matrix().norm() == 0.0);
  oracle::Gen gen(3);
  for (int k = 0; k < 10; ++k) {
    const auto es = eigensystem(build_excited_nuclear_hamiltonian(MagneticField::along(gen.unit_vector(), 1.0)));
    CHECK(es.values[1] == doctest::Approx(0.5 * kC.gamma_n()).epsilon(1e-12));
    CHECK(es.values[0] == doctest::Approx(-0.5 * kC.gamma_n()).epsilon(1e-12));
  }
}

TEST_CASE("eigensystem ordering and phase convention") {
  MatXc d = MatXc::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const auto es = eigensystem(d);
  CHECK(es.values[0] == doctest::Approx(1.0));
  CHECK((es.vectors - MatXc::Identity(2, 2)).norm() < 1e-15);

  const auto sx = eigensystem(MatXc(spin_half_operators()[0]));
  CHECK(sx.values[0] == doctest::Approx(-0.5));
  CHECK(sx.values[1] == doctest::Approx(0.5));

  oracle::Gen gen(5);
  for (int k = 0; k < 20; ++k) {
    const auto h = build_ground_hamiltonian(MagneticField(gen.unit_vector() * gen.uniform(0, 1e-3)),
                                            CrystalTensor::from(gen.tensor()));
    const auto e = eigensystem(h);
    const MatXc& v = e.vectors;
    CHECK((v.adjoint() * v - MatXc::Identity(4, 4)).norm() < 1e-10);
    CHECK((h.matrix() * v - v * e.values.asDiagonal()).norm() < 1e-10 * h.matrix().norm());
    for (int c = 0; c < 4; ++c) {
      Eigen::Index imax = 0;
      v.col(c).cwiseAbs().maxCoeff(&imax);
      CHECK(std::abs(v(imax, c).imag()) < 1e-12);
      CHECK(v(imax, c).real() > 0.0);
    }
  }
}

TEST_CASE("non-Hermitian input is rejected") {
  MatXc m = MatXc::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(eigensystem(m), NonHermitianError);
  CHECK_THROWS_AS(SpinHamiltonian{m}, NonHermitianError);
}

TEST_CASE("propagator limits and oracle agreement") {
  const MatXc h = build_ground_hamiltonian(MagneticField(Vec3(0.1, 0.2, 0.3)),
                                           CrystalTensor::from(HyperfineTensor::paper()))
                      .matrix();
  CHECK((propagator(SpinHamiltonian(h), 0.0) - MatXc::Identity(4, 4)).norm() < 1e-14);

  const double w = 2.0e6;
  const MatXc sz = w * MatXc(spin_half_operators()[2]);
  CHECK((propagator(SpinHamiltonian(sz), kTwoPi / w) + MatXc::Identity(2, 2)).norm() < 1e-12);

  const double t = 3.7e-9;
  const MatXc u = propagator(SpinHamiltonian(h), t);
  const MatXc ref = oracle::taylor_expm(Complex(0, -t) * h);
  CHECK((u - ref).norm() < 1e-9);
  CHECK((u.adjoint() * u - MatXc::Identity(4, 4)).norm() < 1e-10);
  CHECK_THROWS_AS(propagator(SpinHamiltonian(h), -1.0), Error);
}
