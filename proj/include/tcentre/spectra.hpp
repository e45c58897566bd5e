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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tcentre/spin_core.hpp"

namespace tcentre {

struct Transition {
  double freq_mhz = 0.0;
  int lower = 0;  // eigenstate indices, ascending energy
  int upper = 0;
  std::string orientation;
};

/// Sorted ascending by frequency.
struct TransitionList {
  std::vector<Transition> lines;
};

/// All six pairwise level differences of the ground Hamiltonian.
TransitionList transition_frequencies(const MagneticField& b, const CrystalTensor& a,
                                      const PhysicalConstants& c = {},
                                      const std::string& orientation = "");

/// Splits a list into (NMR band, EPR band) at `threshold_mhz`.
std::pair<TransitionList, TransitionList> split_bands(const TransitionList& lines,
                                                      double threshold_mhz = 100.0);

enum class Branch { Up, Down };

/// Electron spinor along +direction (Up) or -direction (Down).
Vec2c electron_spinor(const Vec3& direction, Branch branch);

/// Ground eigenstates sorted into electron branches by their overlap with the
/// electron spin projector along the field. Within a branch index 0 is the
/// state with the larger <I.b> ("nuclear up").
struct BranchLevels {
  Eigensystem es;
  std::array<int, 2> up{};
  std::array<int, 2> down{};
  Vec3 direction = Vec3::UnitZ();

  const std::array<int, 2>& of(Branch b) const { return b == Branch::Up ? up : down; }
  /// Nuclear splitting within a branch, rad/s.
  double splitting(Branch b) const;
};

/// True when gamma_e |B| > 10 max|A|, the regime where the electron branches
/// are unambiguous.
bool secular_regime(const MagneticField& b, const CrystalTensor& a, const PhysicalConstants& c = {});

/// Throws RegimeError below the secular guard.
BranchLevels branch_levels(const MagneticField& b, const CrystalTensor& a,
                           const PhysicalConstants& c = {});

struct EffectiveHyperfine {
  double a_eff_mhz = 0.0;       // b^T A b
  double delta_e_mhz = 0.0;     // Delta_down - Delta_up from the full spectrum
  double splitting_up_mhz = 0.0;
  double splitting_down_mhz = 0.0;
};

EffectiveHyperfine effective_hyperfine(const MagneticField& b, const CrystalTensor& a,
                                       const PhysicalConstants& c = {});

/// Nuclear splitting of the reference T0 branch minus the bare Larmor
/// splitting of TX0, in MHz. Positive when the ground splitting is larger.
double delta_h(const MagneticField& b, const CrystalTensor& a, Branch reference = Branch::Up,
               const PhysicalConstants& c = {});

enum class LineShape { Lorentzian, Gaussian };

struct SpectrumProfile {
  std::vector<double> freq_mhz;
  std::vector<double> amplitude;
  double linewidth_mhz = 0.0;  // full width at half maximum
  LineShape shape = LineShape::Lorentzian;
};

std::vector<double> frequency_grid(double lo_mhz, double hi_mhz, double step_mhz);

/// Sum of unit-area lines (FWHM `linewidth_mhz`) at the given positions,
/// weighted by `weights` (uniform when empty), plus seeded Gaussian noise.
/// Amplitudes are clipped at zero.
SpectrumProfile synthesize_spectrum(const TransitionList& lines, std::vector<double> grid_mhz,
                                    double linewidth_mhz, double noise_rms = 0.0,
                                    std::span<const double> weights = {},
                                    LineShape shape = LineShape::Lorentzian,
                                    std::uint64_t seed = 0);

double line_shape(LineShape shape, double detuning_mhz, double fwhm_mhz);

}  // namespace tcentre
