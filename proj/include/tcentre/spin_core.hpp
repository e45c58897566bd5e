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

// Ground (T0) and excited (TX0) spin Hamiltonians of the electron-hydrogen
// pair, plus the small dense Hermitian linear algebra the rest of the
// library is built on.
//
// Conventions:
//   * spin-1/2 operators S = sigma/2, hbar folded into the gyromagnetic ratios;
//   * basis |up,Up>, |up,Dn>, |dn,Up>, |dn,Dn> (electron (x) nucleus), with
//     spin quantised along the crystal [001] axis;
//   * all matrix entries are angular frequencies (rad/s).

#pragma once

#include <array>

#include "tcentre/types.hpp"

namespace tcentre {

struct PhysicalConstants {
  double g_e = 2.005;
  double g_n = 5.585;
  double mu_B = 9.2740100783e-24;  // J/T
  double mu_N = 5.0507837461e-27;  // J/T
  double hbar = 1.054571817e-34;   // J s

  /// Electron gyromagnetic ratio in rad/s/T; negative.
  double gamma_e() const { return -g_e * mu_B / hbar; }
  /// Hydrogen gyromagnetic ratio in rad/s/T; positive.
  double gamma_n() const { return g_n * mu_N / hbar; }
};

/// Principal values plus the Euler orientation R = Z(gamma) Y(beta) Z(alpha)
/// of the z0 defect frame relative to the silicon crystal axes.
struct HyperfineTensor {
  Vec3 principal_mhz = Vec3::Zero();                    // (A_X, A_Y, A_Z)
  Vec3 euler_deg = Vec3(135.0, 90.0, -45.0);            // (alpha, beta, gamma)

  Mat3 rotation() const;
  /// R diag(A) R^T in MHz.
  Mat3 crystal_mhz() const;

  static HyperfineTensor paper();
  static HyperfineTensor dft();
  static HyperfineTensor isotropic(double a_mhz);
};

Mat3 euler_zyz(double alpha_rad, double beta_rad, double gamma_rad);

/// Symmetric 3x3 coupling expressed in the crystal frame, stored in rad/s.
class CrystalTensor {
 public:
  CrystalTensor() = default;
  static CrystalTensor from_mhz(const Mat3& mhz);
  static CrystalTensor from_angular(const Mat3& angular);
  static CrystalTensor from(const HyperfineTensor& t) { return from_mhz(t.crystal_mhz()); }

  const Mat3& angular() const { return angular_; }
  Mat3 mhz() const { return angular_ / mhz_to_angular(1.0); }
  double max_abs_angular() const { return angular_.cwiseAbs().maxCoeff(); }

  /// R A R^T
  CrystalTensor rotated(const Mat3& r) const { return from_angular(r * angular_ * r.transpose()); }

 private:
  explicit CrystalTensor(const Mat3& a) : angular_(a) {}
  Mat3 angular_ = Mat3::Zero();
};

class MagneticField {
 public:
  MagneticField() = default;
  explicit MagneticField(const Vec3& tesla) : tesla_(tesla) {}
  /// theta measured from [001], phi from [100] toward [010].
  static MagneticField spherical(double magnitude_t, double theta_rad, double phi_rad);
  static MagneticField along(const Vec3& direction, double magnitude_t);

  const Vec3& tesla() const { return tesla_; }
  double magnitude() const { return tesla_.norm(); }
  /// Unit vector along the field; [001] when the field is zero.
  Vec3 direction() const;
  double theta() const;
  double phi() const;  // in [0, 2 pi)

 private:
  Vec3 tesla_ = Vec3::Zero();
};

/// Hermitian operator in rad/s; 4x4 for T0, 2x2 for the TX0 nuclear space.
class SpinHamiltonian {
 public:
  explicit SpinHamiltonian(MatXc m);
  const MatXc& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  MatXc m_;
};

struct Eigensystem {
  Eigen::VectorXd values;  // ascending, rad/s
  MatXc vectors;           // columns
};

/// Spin-1/2 operators (S_x, S_y, S_z) on a single spin.
const std::array<Mat2c, 3>& spin_half_operators();
/// Electron operators S_i (x) 1 and nuclear operators 1 (x) I_i on the 4-dim space.
const std::array<Mat4c, 3>& electron_operators();
const std::array<Mat4c, 3>& nuclear_operators();

/// H = -B.(gamma_e S + gamma_n I) + S A I. Throws InvalidTensorError when A
/// is not symmetric.
SpinHamiltonian build_ground_hamiltonian(const MagneticField& b, const CrystalTensor& a,
                                         const PhysicalConstants& c = {});

/// Nuclear part of the TX0 Hamiltonian, -gamma_n B.I. The hole Zeeman term
/// only adds a phase per hole branch and is dropped.
SpinHamiltonian build_excited_nuclear_hamiltonian(const MagneticField& b,
                                                  const PhysicalConstants& c = {});

/// Ascending eigenvalues with the phase of every eigenvector fixed so that
/// its largest-magnitude component is real and positive. Inside a degenerate
/// block vectors are ordered by descending component magnitudes; only the
/// block's spectral projector is stable there, not the individual vectors.
Eigensystem eigensystem(const SpinHamiltonian& h);
Eigensystem eigensystem(const MatXc& h);

/// exp(-i H t) for t >= 0.
MatXc propagator(const SpinHamiltonian& h, double t_seconds);
MatXc propagator(const Eigensystem& es, double t_seconds);

double hermiticity_error(const MatXc& m);

}  // namespace tcentre
