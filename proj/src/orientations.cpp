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

#include "tcentre/orientations.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "tcentre/spectra.hpp"

namespace tcentre {

const std::vector<Mat3>& cubic_rotations() {
  static const std::vector<Mat3> group = [] {
    std::vector<Mat3> out;
    std::array<int, 3> perm{0, 1, 2};
    do {
      for (int signs = 0; signs < 8; ++signs) {
        Mat3 m = Mat3::Zero();
        for (int i = 0; i < 3; ++i) m(i, perm[i]) = (signs >> i) & 1 ? -1.0 : 1.0;
        if (m.determinant() > 0.0) out.push_back(m);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }();
  return group;
}

const std::vector<OrientationId>& orientation_set() {
  static const std::vector<OrientationId> set = [] {
    Mat3 c2;  // 180 degrees about [1-10]
    c2 << 0, -1, 0, -1, 0, 0, 0, 0, -1;
    const auto& g = cubic_rotations();
    std::vector<bool> covered(g.size(), false);
    auto find = [&](const Mat3& m) {
      for (std::size_t k = 0; k < g.size(); ++k)
        if ((g[k] - m).cwiseAbs().maxCoeff() < 1e-12) return k;
      return g.size();
    };
    std::vector<OrientationId> out;
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (covered[k]) continue;
      covered[k] = true;
      covered[find(g[k] * c2)] = true;
      out.push_back({"z" + std::to_string(out.size()), g[k]});
    }
    return out;
  }();
  return set;
}

std::optional<int> orientation_index(std::string_view label) {
  const auto& set = orientation_set();
  for (std::size_t k = 0; k < set.size(); ++k)
    if (set[k].label == label) return static_cast<int>(k);
  return std::nullopt;
}

CrystalTensor tensor_for_orientation(const CrystalTensor& z0, const OrientationId& id) {
  return z0.rotated(id.rotation);
}

CrystalTensor tensor_for_orientation(const HyperfineTensor& z0, const OrientationId& id) {
  return tensor_for_orientation(CrystalTensor::from(z0), id);
}

std::vector<std::vector<int>> partition_tensors(const std::vector<CrystalTensor>& tensors,
                                                const MagneticField& b, double tolerance_mhz,
                                                const PhysicalConstants& c) {
  std::vector<std::vector<double>> spectra;
  spectra.reserve(tensors.size());
  for (const auto& t : tensors) {
    std::vector<double> f;
    for (const auto& line : transition_frequencies(b, t, c).lines) f.push_back(line.freq_mhz);
    spectra.push_back(std::move(f));
  }
  std::vector<std::vector<int>> classes;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    bool placed = false;
    for (auto& cls : classes) {
      const auto& ref = spectra[cls.front()];
      bool same = true;
      for (std::size_t i = 0; i < ref.size() && same; ++i)
        same = std::abs(ref[i] - spectra[k][i]) <= tolerance_mhz;
      if (same) {
        cls.push_back(static_cast<int>(k));
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({static_cast<int>(k)});
  }
  return classes;
}

OrientationPartition partition_by_field(const Vec3& direction, const CrystalTensor& z0,
                                        double magnitude_t, double tolerance_mhz,
                                        const PhysicalConstants& c) {
  if (direction.norm() == 0.0) throw Error("partition requires a nonzero field direction");
  const Vec3 unit = direction.normalized();
  std::vector<CrystalTensor> tensors;
  for (const auto& id : orientation_set()) tensors.push_back(tensor_for_orientation(z0, id));
  OrientationPartition out;
  out.field_direction = unit;
  out.classes = partition_tensors(tensors, MagneticField(unit * magnitude_t), tolerance_mhz, c);
  return out;
}

}  // namespace tcentre
