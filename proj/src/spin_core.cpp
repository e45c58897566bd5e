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

#include "tcentre/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

namespace tcentre {

Mat3 euler_zyz(double alpha, double beta, double gamma) {
  auto rz = [](double a) {
    Mat3 r;
    r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return r;
  };
  Mat3 ry;
  ry << std::cos(beta), 0, std::sin(beta), 0, 1, 0, -std::sin(beta), 0, std::cos(beta);
  return rz(gamma) * ry * rz(alpha);
}

Mat3 HyperfineTensor::rotation() const {
  return euler_zyz(deg_to_rad(euler_deg.x()), deg_to_rad(euler_deg.y()),
                   deg_to_rad(euler_deg.z()));
}

Mat3 HyperfineTensor::crystal_mhz() const {
  const Mat3 r = rotation();
  Mat3 m = r * principal_mhz.asDiagonal() * r.transpose();
  return 0.5 * (m + m.transpose());
}

HyperfineTensor HyperfineTensor::paper() {
  return {Vec3(4.037, -4.499, -2.927), Vec3(135.0, 90.0, -45.0)};
}

HyperfineTensor HyperfineTensor::dft() {
  return {Vec3(5.347, -4.172, -2.114), Vec3(135.0, 90.0, -45.0)};
}

HyperfineTensor HyperfineTensor::isotropic(double a_mhz) {
  return {Vec3::Constant(a_mhz), Vec3(135.0, 90.0, -45.0)};
}

CrystalTensor CrystalTensor::from_mhz(const Mat3& mhz) { return from_angular(mhz * mhz_to_angular(1.0)); }

CrystalTensor CrystalTensor::from_angular(const Mat3& a) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidTensorError("hyperfine tensor is not symmetric");
  }
  if (!a.allFinite()) throw InvalidTensorError("hyperfine tensor has non-finite entries");
  return CrystalTensor(a);
}

MagneticField MagneticField::spherical(double magnitude, double theta, double phi) {
  return MagneticField(magnitude * Vec3(std::sin(theta) * std::cos(phi),
                                        std::sin(theta) * std::sin(phi), std::cos(theta)));
}

MagneticField MagneticField::along(const Vec3& direction, double magnitude) {
  const double n = direction.norm();
  if (n == 0.0) throw Error("field direction has zero length");
  return MagneticField(direction / n * magnitude);
}

Vec3 MagneticField::direction() const {
  const double n = tesla_.norm();
  return n > 0.0 ? Vec3(tesla_ / n) : Vec3::UnitZ();
}

double MagneticField::theta() const {
  const Vec3 d = direction();
  return std::acos(std::clamp(d.z(), -1.0, 1.0));
}

double MagneticField::phi() const {
  double p = std::atan2(tesla_.y(), tesla_.x());
  if (p < 0.0) p += kTwoPi;
  return p;
}

double hermiticity_error(const MatXc& m) {
  return (m - m.adjoint()).norm();
}

SpinHamiltonian::SpinHamiltonian(MatXc m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw NonHermitianError("Hamiltonian is not square");
  const double n = m_.norm();
  if (hermiticity_error(m_) > 1e-12 * std::max(n, 1e-300)) {
    throw NonHermitianError("Hamiltonian is not Hermitian");
  }
}

const std::array<Mat2c, 3>& spin_half_operators() {
  static const std::array<Mat2c, 3> ops = [] {
    std::array<Mat2c, 3> s;
    s[0] << 0, 0.5, 0.5, 0;
    s[1] << 0, Complex(0, -0.5), Complex(0, 0.5), 0;
    s[2] << 0.5, 0, 0, -0.5;
    return s;
  }();
  return ops;
}

namespace {

Mat4c kron(const Mat2c& a, const Mat2c& b) {
  Mat4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

const std::array<Mat4c, 3>& electron_operators() {
  static const std::array<Mat4c, 3> ops = [] {
    std::array<Mat4c, 3> s;
    for (int i = 0; i < 3; ++i) s[i] = kron(spin_half_operators()[i], Mat2c::Identity());
    return s;
  }();
  return ops;
}

const std::array<Mat4c, 3>& nuclear_operators() {
  static const std::array<Mat4c, 3> ops = [] {
    std::array<Mat4c, 3> s;
    for (int i = 0; i < 3; ++i) s[i] = kron(Mat2c::Identity(), spin_half_operators()[i]);
    return s;
  }();
  return ops;
}

SpinHamiltonian build_ground_hamiltonian(const MagneticField& b, const CrystalTensor& a,
                                         const PhysicalConstants& c) {
  const auto& s = electron_operators();
  const auto& n = nuclear_operators();
  const Mat3& am = a.angular();
  const double ge = c.gamma_e();
  const double gn = c.gamma_n();
  Mat4c h = Mat4c::Zero();
  for (int i = 0; i < 3; ++i) {
    const double bi = b.tesla()[i];
    h -= bi * (ge * s[i] + gn * n[i]);
    for (int j = 0; j < 3; ++j) {
      if (am(i, j) != 0.0) h += am(i, j) * (s[i] * n[j]);
    }
  }
  h = 0.5 * (h + h.adjoint()).eval();
  return SpinHamiltonian(h);
}

SpinHamiltonian build_excited_nuclear_hamiltonian(const MagneticField& b, const PhysicalConstants& c) {
  const auto& s = spin_half_operators();
  Mat2c h = Mat2c::Zero();
  for (int i = 0; i < 3; ++i) h -= c.gamma_n() * b.tesla()[i] * s[i];
  return SpinHamiltonian(h);
}

namespace {

void fix_phase(Eigen::Ref<VecXc> v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    // earliest index wins near-ties so the choice is stable under rounding
    if (m > best * (1.0 + 1e-10) + 1e-14) {
      best = m;
      imax = i;
    }
  }
  if (best > 0.0) v *= std::conj(v[imax]) / best;
}

bool magnitudes_before(const VecXc& a, const VecXc& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double ma = std::abs(a[i]);
    const double mb = std::abs(b[i]);
    if (std::abs(ma - mb) > 1e-10) return ma > mb;
  }
  return false;
}

}  // namespace

Eigensystem eigensystem(const MatXc& h) {
  const double n = h.norm();
  if (hermiticity_error(h) > 1e-12 * std::max(n, 1e-300)) {
    throw NonHermitianError("eigensystem requires a Hermitian matrix");
  }
  Eigen::SelfAdjointEigenSolver<MatXc> solver(h);
  if (solver.info() != Eigen::Success) throw Error("Hermitian eigensolver failed");
  Eigensystem es{solver.eigenvalues(), solver.eigenvectors()};
  const Eigen::Index dim = h.rows();
  for (Eigen::Index k = 0; k < dim; ++k) fix_phase(es.vectors.col(k));

  const double tol = 1e-12 * std::max(n, 1e-300);
  Eigen::Index start = 0;
  while (start < dim) {
    Eigen::Index end = start + 1;
    while (end < dim && es.values[end] - es.values[end - 1] <= tol) ++end;
    if (end - start > 1) {
      std::vector<VecXc> block;
      for (Eigen::Index k = start; k < end; ++k) block.emplace_back(es.vectors.col(k));
      std::stable_sort(block.begin(), block.end(), magnitudes_before);
      for (Eigen::Index k = start; k < end; ++k) es.vectors.col(k) = block[k - start];
    }
    start = end;
  }
  return es;
}

Eigensystem eigensystem(const SpinHamiltonian& h) { return eigensystem(h.matrix()); }

MatXc propagator(const Eigensystem& es, double t) {
  if (t < 0.0) throw Error("propagator requires t >= 0");
  VecXc phases(es.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::exp(-kI * (es.values[k] * t));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

MatXc propagator(const SpinHamiltonian& h, double t) { return propagator(eigensystem(h), t); }

}  // namespace tcentre
