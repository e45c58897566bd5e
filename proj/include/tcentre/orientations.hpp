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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcentre/spin_core.hpp"

namespace tcentre {

/// One of the 12 inversion-paired defect orientations. `rotation` is a cubic
/// group element taking the z0 frame to this orientation.
struct OrientationId {
  std::string label;  // "z0" ... "z11"
  Mat3 rotation;
};

struct OrientationPartition {
  std::vector<std::vector<int>> classes;  // indices into orientation_set()
  Vec3 field_direction = Vec3::UnitZ();
};

/// The 24 proper rotations of the cube as signed permutation matrices, in a
/// fixed order starting with the identity.
const std::vector<Mat3>& cubic_rotations();

/// Deterministic list of 12 orientations, z0 first (identity). Built as coset
/// representatives of the cubic group modulo the 2-fold axis normal to the
/// z0 defect plane (the 180 degree turn about [1-10]), which maps the z0 frame
/// onto itself up to principal-axis signs.
const std::vector<OrientationId>& orientation_set();

std::optional<int> orientation_index(std::string_view label);

/// R_id M_z0 R_id^T
CrystalTensor tensor_for_orientation(const CrystalTensor& z0, const OrientationId& id);
CrystalTensor tensor_for_orientation(const HyperfineTensor& z0, const OrientationId& id);

/// Groups orientations whose sorted ground-state transition lists agree to
/// within `tolerance_mhz` at the given field. Classes are ordered by their
/// lowest member index, members ascending. Throws on a zero direction.
OrientationPartition partition_by_field(const Vec3& direction, const CrystalTensor& z0,
                                        double magnitude_t, double tolerance_mhz = 1e-3,
                                        const PhysicalConstants& c = {});

/// Same grouping over an arbitrary list of crystal-frame tensors.
std::vector<std::vector<int>> partition_tensors(const std::vector<CrystalTensor>& tensors,
                                                const MagneticField& b, double tolerance_mhz,
                                                const PhysicalConstants& c = {});

}  // namespace tcentre
