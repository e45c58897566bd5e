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

// Nuclear memory through one optical cycle: instantaneous excitation of the
// electron branch |e> to the bound-exciton state |h>, nuclear evolution under
// the bare Larmor Hamiltonian while excited, and decay back to |e> at an
// exponentially distributed time T.
//
// A trajectory emitting at T ends in
//   |psi(T)> = U_e(t - T) P_eh U_h(T) P_he |psi_0>
// and the cycle state is the lifetime-weighted average of those trajectories.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcentre/spectra.hpp"

namespace tcentre {

struct InitialState {
  enum class Kind { BranchSuperposition, Eigenstate, Nuclear };
  Kind kind = Kind::BranchSuperposition;
  int index = 0;                       // Eigenstate: 0 or 1 within the branch
  Vec2c nuclear = Vec2c(1.0, 0.0);     // Nuclear: spinor on the nucleus, lab basis

  /// (|0> + |1>)/sqrt 2 over the two ground eigenstates of the branch.
  static InitialState superposition() { return {}; }
  static InitialState eigenstate(int i) { return {Kind::Eigenstate, i, Vec2c(1.0, 0.0)}; }
  /// |e> (x) n, with |e> the bare electron spinor of the branch.
  static InitialState product(const Vec2c& n) { return {Kind::Nuclear, 0, n}; }
};

struct CycleParams {
  double tau_s = 10e-9;
  double t_s = 100e-9;
  MagneticField field;
  CrystalTensor tensor;
  Branch electron = Branch::Up;
  /// Hole spin of the optically coupled TX0 state. Its Zeeman energy only
  /// adds a global phase to every trajectory, so the label does not change
  /// any result.
  Branch hole = Branch::Up;
  InitialState initial;
  /// Permit t < 10 tau, where a noticeable part of the population has not
  /// yet decayed and the conditional state depends on t.
  bool allow_short_time = false;
  PhysicalConstants constants;

  /// True when 2 pi tau < 0.1 / max|A|, i.e. the hyperfine structure is not
  /// resolved during the excited-state lifetime.
  bool unresolved_hyperfine() const;
  /// Throws Error for tau <= 0 or t < 0.
  void validate() const;
};

struct CycleOutcome {
  /// Ground-state density matrix conditioned on emission having occurred,
  /// lab basis, trace 1.
  Mat4c rho = Mat4c::Zero();
  /// Partial trace of rho over the electron.
  Mat2c rho_nuclear = Mat2c::Zero();
  /// Loss of nuclear polarisation 1 - <sigma> for a cycle started in a
  /// nuclear eigenstate of the branch, unconditioned (weighted by the
  /// emitted fraction). Twice the population transferred to the other
  /// eigenstate; its long-lifetime value is sin^2 theta_q.
  double p_flip = 0.0;
  /// Population ending in the other eigenstate of the branch.
  double flip_population = 0.0;
  double emitted_fraction = 0.0;  // 1 - exp(-t/tau)
  /// <psi_ref| rho |psi_ref> with psi_ref = U_e(t) psi_0.
  double fidelity = 1.0;
  double purity = 1.0;
  /// Phase of the branch coherence relative to the ideal evolution, rad.
  double mean_phase = 0.0;
  bool unresolved_hyperfine = false;
};

struct EffectiveFieldGeometry {
  Vec3 f_tesla = Vec3::Zero();      // effective field of the electron on the nucleus
  Vec3 b_eff_tesla = Vec3::Zero();  // B - F: the field the ground-state nucleus precesses about
  double theta_q = 0.0;             // angle between B_eff and B
  double a = 1.0;                   // (1 + cos theta_q) / 2
};

/// Ground state at emission time T, normalised. Throws Error when the initial
/// state has no weight on the electron branch or T lies outside [0, t].
Vec4c trajectory_state(const CycleParams& params, double emission_time_s);

/// Initial ground state psi_0 of the cycle.
Vec4c initial_ground_state(const CycleParams& params);

/// Trajectory average in closed form over the eigenbases of H_h and H_e.
/// Throws RegimeError for t < 10 tau without the override, or below the
/// secular guard.
CycleOutcome cycle_density_matrix(const CycleParams& params);

/// Same cycle integrated as a master equation on (TX0 (x) n) + (T0 (x) n)
/// with decay |h> -> |e> at rate 1/tau. Throws Error when the integrator's
/// step-doubling check fails.
CycleOutcome lindblad_oracle(const CycleParams& params);

/// 1/2 sum |eig(a - b)|
double trace_distance(const MatXc& a, const MatXc& b);

/// gamma_n F = S A with S = +-b/2 for the branch. Throws RegimeError below the
/// secular guard.
EffectiveFieldGeometry effective_field_geometry(const MagneticField& b, const CrystalTensor& a,
                                                Branch branch = Branch::Up,
                                                const PhysicalConstants& c = {});

/// 4a(1 - a)
double flip_probability_limit(const EffectiveFieldGeometry& g);

/// 1 / p_flip; +inf when p_flip < 1e-15.
double cyclicity(const CycleParams& params);

/// Lifetime-averaged <I> while in the excited state, for a cycle started in
/// branch eigenstate `index`. The long-lifetime magnitude is |2a - 1| / 2.
Vec3 excited_state_mean_moment(const CycleParams& params, int index = 0);

// ---------------------------------------------------------------------------
// Dephasing-protection manifold

struct DpmContour {
  bool exists = false;
  /// Principal axis (crystal frame) the manifold wraps around, the one whose
  /// delta_h sign differs from the other two.
  Vec3 axis = Vec3::UnitX();
  int axis_index = 0;  // position among the ascending principal values
  /// Closed polylines of (theta, phi) in radians, crystal frame; one around
  /// +axis and one around -axis. First point repeated at the end.
  std::vector<std::vector<std::pair<double, double>>> curves;
  double max_delta_e_mhz = 0.0;
  Vec3 max_delta_e_direction = Vec3::UnitX();
};

/// Zero set of delta_h over field directions at fixed |B|, sampled at
/// `resolution` azimuths around the axis. Each point is bisected to
/// |delta_h| < 1 Hz. Throws RegimeError below the secular guard; a tensor
/// without a sign change returns exists = false.
DpmContour dpm_contour(const CrystalTensor& a, double b_magnitude_t, int resolution = 180,
                       Branch reference = Branch::Up, const PhysicalConstants& c = {});

/// Direction on the manifold at azimuth `psi` (rad) about its axis. Empty when
/// no sign change exists along that azimuth.
std::optional<Vec3> dpm_point(const CrystalTensor& a, double b_magnitude_t, double psi,
                              Branch reference = Branch::Up, const PhysicalConstants& c = {});

struct ProtectionScaling {
  std::vector<double> field_t;
  std::vector<double> p_flip;
  /// Least-squares slope of log p_flip against log B.
  double exponent = 0.0;
};

/// Long-lifetime p_flip on the manifold (azimuth `psi`) across fields.
ProtectionScaling dpm_protection_scaling(const CrystalTensor& a, const std::vector<double>& fields_t,
                                         double psi = 0.25 * std::numbers::pi,
                                         const PhysicalConstants& c = {});

// ---------------------------------------------------------------------------
// Corrections, on the two-dimensional nuclear memory of the branch

/// Nuclear Hamiltonian of the branch in the lab nuclear basis, built from the
/// exact eigenpairs: the branch eigenvectors projected on <e| and
/// orthonormalised, with the mean energy removed. rad/s.
Mat2c branch_nuclear_hamiltonian(const MagneticField& b, const CrystalTensor& a, Branch branch = Branch::Up,
                                 const PhysicalConstants& c = {});

/// -gamma_n B.I, rad/s.
Mat2c excited_nuclear_hamiltonian(const MagneticField& b, const PhysicalConstants& c = {});

/// (1/tau) int_0^t exp(-T/tau) U_e(t - T) U_h(T) dT. Throws RegimeError for
/// t < 10 tau unless `allow_short_time`.
Mat2c average_unitary(double t_s, double tau_s, const Mat2c& h_e, const Mat2c& h_h,
                      bool allow_short_time = false);

/// U_e(t) W^dagger with W the unitary polar factor of U_avg. Throws
/// RegimeError when U_avg is singular.
Mat2c correction_unitary(double t_s, double tau_s, const Mat2c& h_e, const Mat2c& h_h,
                         bool allow_short_time = false);

/// U_h(T)^dagger U_e(t - T)^dagger, the exact inverse of the trajectory
/// emitting at T.
Mat2c detection_correction(double t_s, double emission_time_s, const Mat2c& h_e, const Mat2c& h_h);

struct NuclearMemory {
  Mat2c h_e = Mat2c::Zero();
  Mat2c h_h = Mat2c::Zero();
  Mat2c branch_vectors = Mat2c::Identity();  // columns: nuclear eigenstates 0 and 1
  Vec2c psi0 = Vec2c(1.0, 0.0);
};

NuclearMemory nuclear_memory(const CycleParams& params);

/// Conditional nuclear state after the cycle, trace 1.
Mat2c nuclear_cycle_state(const NuclearMemory& m, double t_s, double tau_s);

struct CorrectedOutcome {
  double fidelity = 1.0;
  double corrected_fidelity = 1.0;
  /// Polarisation loss (same convention as CycleOutcome::p_flip) before and
  /// after the average correction.
  double p_flip = 0.0;
  double corrected_p_flip = 0.0;
  Mat2c u_avg = Mat2c::Identity();
  Mat2c u_corr = Mat2c::Identity();
};

/// Metrics of the nuclear memory with and without the average correction.
CorrectedOutcome corrected_outcome(const CycleParams& params);

/// Ensemble fidelity when a fraction of emissions is detected and each
/// detected trajectory receives U_e(t) times its detection_correction; the
/// rest stay uncorrected. `samples` emission times are drawn at equal
/// probability quantiles.
double detection_feedback_fidelity(const CycleParams& params, double detection_fraction, int samples = 64);

// ---------------------------------------------------------------------------
// Direction maps

enum class MapMetric { Cyclicity, DeltaH, DeltaE, CorrectedFidelity };

std::optional<MapMetric> parse_map_metric(const std::string& name);
std::string to_string(MapMetric m);

struct MapWindow {
  double theta_min = 0.0;
  double theta_max = std::numbers::pi;
  double phi_min = 0.0;
  double phi_max = kTwoPi;  // exclusive
};

struct DirectionMap {
  MapMetric metric = MapMetric::DeltaH;
  std::vector<double> theta;  // rad
  std::vector<double> phi;    // rad
  /// values[i * phi.size() + j] at (theta[i], phi[j]).
  std::vector<double> values;
};

struct MapRequest {
  MapMetric metric = MapMetric::DeltaH;
  double b_magnitude_t = 1.0;
  double tau_s = 10e-9;
  double t_s = 100e-9;
  int n_theta = 91;
  int n_phi = 180;
  MapWindow window;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// One metric value per direction; theta runs over the closed window, phi
/// over the half-open one. Throws Error for fewer than 2 x 2 nodes.
DirectionMap map_over_directions(const CrystalTensor& a, const MapRequest& request,
                                 const PhysicalConstants& c = {});

}  // namespace tcentre
