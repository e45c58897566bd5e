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

#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tcentre {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;
using Vec4c = Eigen::Vector4cd;
using Mat4c = Eigen::Matrix4cd;
using VecXc = Eigen::VectorXcd;
using MatXc = Eigen::MatrixXcd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

// Energies are carried internally as angular frequencies (rad/s). Everything
// a user sees is linear frequency in MHz.
constexpr double mhz_to_angular(double mhz) { return kTwoPi * 1e6 * mhz; }
constexpr double angular_to_mhz(double omega) { return omega / (kTwoPi * 1e6); }
constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coupling tensor that is not symmetric, or otherwise malformed.
class InvalidTensorError : public Error {
 public:
  using Error::Error;
};

class NonHermitianError : public Error {
 public:
  using Error::Error;
};

/// Inputs outside the physical regime an operation is valid in (secular
/// guard, lifetime guard, singular average evolution, ...).
class RegimeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace tcentre
