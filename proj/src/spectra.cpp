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

#include "tcentre/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tcentre {

TransitionList transition_frequencies(const MagneticField& b, const CrystalTensor& a,
                                      const PhysicalConstants& c, const std::string& orientation) {
  const Eigensystem es = eigensystem(build_ground_hamiltonian(b, a, c));
  TransitionList out;
  const int n = static_cast<int>(es.values.size());
  for (int lo = 0; lo < n; ++lo)
    for (int hi = lo + 1; hi < n; ++hi)
      out.lines.push_back({angular_to_mhz(es.values[hi] - es.values[lo]), lo, hi, orientation});
  std::stable_sort(out.lines.begin(), out.lines.end(), [](const Transition& x, const Transition& y) {
    return x.freq_mhz < y.freq_mhz;
  });
  return out;
}

std::pair<TransitionList, TransitionList> split_bands(const TransitionList& lines, double threshold) {
  std::pair<TransitionList, TransitionList> out;
  for (const auto& l : lines.lines) (l.freq_mhz < threshold ? out.first : out.second).lines.push_back(l);
  return out;
}

Vec2c electron_spinor(const Vec3& d, Branch branch) {
  const Vec3 u = d.normalized();
  const double theta = std::acos(std::clamp(u.z(), -1.0, 1.0));
  const double phi = std::atan2(u.y(), u.x());
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  if (branch == Branch::Up) return Vec2c(c, std::exp(kI * phi) * s);
  return Vec2c(-std::exp(-kI * phi) * s, c);
}

double BranchLevels::splitting(Branch b) const {
  const auto& idx = of(b);
  return std::abs(es.values[idx[0]] - es.values[idx[1]]);
}

bool secular_regime(const MagneticField& b, const CrystalTensor& a, const PhysicalConstants& c) {
  return std::abs(c.gamma_e()) * b.magnitude() > 10.0 * a.max_abs_angular();
}

BranchLevels branch_levels(const MagneticField& b, const CrystalTensor& a, const PhysicalConstants& c) {
  if (!secular_regime(b, a, c)) {
    throw RegimeError("field below the secular guard; electron branches are ambiguous");
  }
  BranchLevels out;
  out.direction = b.direction();
  out.es = eigensystem(build_ground_hamiltonian(b, a, c));

  Mat4c s_b = Mat4c::Zero();
  Mat4c i_b = Mat4c::Zero();
  for (int i = 0; i < 3; ++i) {
    s_b += out.direction[i] * electron_operators()[i];
    i_b += out.direction[i] * nuclear_operators()[i];
  }
  const Mat4c up_projector = 0.5 * Mat4c::Identity() + s_b;

  std::vector<int> up, down;
  for (int k = 0; k < 4; ++k) {
    const Vec4c v = out.es.vectors.col(k);
    const double w = (v.adjoint() * up_projector * v)(0, 0).real();
    (w > 0.5 ? up : down).push_back(k);
  }
  if (up.size() != 2 || down.size() != 2) throw RegimeError("could not separate electron branches");
  auto order = [&](const std::vector<int>& idx) {
    auto moment = [&](int k) {
      const Vec4c v = out.es.vectors.col(k);
      return (v.adjoint() * i_b * v)(0, 0).real();
    };
    return moment(idx[0]) >= moment(idx[1]) ? std::array<int, 2>{idx[0], idx[1]}
                                             : std::array<int, 2>{idx[1], idx[0]};
  };
  out.up = order(up);
  out.down = order(down);
  return out;
}

EffectiveHyperfine effective_hyperfine(const MagneticField& b, const CrystalTensor& a,
                                       const PhysicalConstants& c) {
  const BranchLevels lv = branch_levels(b, a, c);
  EffectiveHyperfine out;
  out.splitting_up_mhz = angular_to_mhz(lv.splitting(Branch::Up));
  out.splitting_down_mhz = angular_to_mhz(lv.splitting(Branch::Down));
  out.delta_e_mhz = out.splitting_down_mhz - out.splitting_up_mhz;
  out.a_eff_mhz = lv.direction.dot(a.mhz() * lv.direction);
  return out;
}

double delta_h(const MagneticField& b, const CrystalTensor& a, Branch reference,
               const PhysicalConstants& c) {
  const BranchLevels lv = branch_levels(b, a, c);
  return angular_to_mhz(lv.splitting(reference) - c.gamma_n() * b.magnitude());
}

std::vector<double> frequency_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw Error("invalid frequency grid");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
  return g;
}

double line_shape(LineShape shape, double x, double fwhm) {
  if (shape == LineShape::Lorentzian) {
    const double g = 0.5 * fwhm;
    return g / (std::numbers::pi * (x * x + g * g));
  }
  const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(kTwoPi));
}

SpectrumProfile synthesize_spectrum(const TransitionList& lines, std::vector<double> grid,
                                    double linewidth, double noise_rms,
                                    std::span<const double> weights, LineShape shape,
                                    std::uint64_t seed) {
  if (!(linewidth > 0.0)) throw Error("linewidth must be positive");
  if (!weights.empty() && weights.size() != lines.lines.size()) {
    throw Error("weights must match the number of lines");
  }
  SpectrumProfile p;
  p.freq_mhz = std::move(grid);
  p.amplitude.assign(p.freq_mhz.size(), 0.0);
  p.linewidth_mhz = linewidth;
  p.shape = shape;
  for (std::size_t k = 0; k < lines.lines.size(); ++k) {
    const double w = weights.empty() ? 1.0 : weights[k];
    for (std::size_t i = 0; i < p.freq_mhz.size(); ++i)
      p.amplitude[i] += w * line_shape(shape, p.freq_mhz[i] - lines.lines[k].freq_mhz, linewidth);
  }
  if (noise_rms > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_rms);
    for (double& a : p.amplitude) a += noise(rng);
  }
  for (double& a : p.amplitude) a = std::max(a, 0.0);
  return p;
}

}  // namespace tcentre
