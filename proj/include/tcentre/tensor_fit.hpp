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

// Simultaneous least-squares extraction of the hyperfine tensor from
// resonance lines observed across many fields and orientation subsets.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcentre/orientations.hpp"
#include "tcentre/spectra.hpp"

namespace tcentre {

struct ResonanceRecord {
  Vec3 field_t = Vec3::Zero();
  double freq_mhz = 0.0;
  double sigma_mhz = 0.0;
  /// Label of one orientation of the subset the line belongs to ("z3").
  std::optional<std::string> subset;
  /// Eigenstate indices (lower, upper) of the transition.
  std::optional<std::pair<int, int>> pair;
};

struct ResonanceDataset {
  std::vector<ResonanceRecord> records;

  /// Throws Error unless every sigma is positive and there are at least 8
  /// records spanning two or more nonzero field directions.
  void validate() const;

  /// CSV: Bx_T,By_T,Bz_T,freq_MHz,sigma_MHz[,subset][,pair]. Header required,
  /// '#' starts a comment, pair written as "lower-upper". Throws ParseError.
  static ResonanceDataset read_csv(std::istream& in);
  void write_csv(std::ostream& out) const;
};

struct Assignment {
  std::vector<int> observed_to_predicted;  // -1 where unmatched
  std::vector<int> unmatched_observed;
  std::vector<int> unmatched_predicted;
  double total_cost = 0.0;  // sum |delta f| over matched pairs
};

/// Minimum total |delta f| one-to-one matching. An observation equidistant
/// from two predictions goes to the lower predicted frequency.
Assignment assign_peaks(std::span<const double> predicted, std::span<const double> observed);

struct FitOptions {
  /// Fit (alpha, beta) as well. The cubic orbit makes several Euler triples
  /// equivalent, so this mode carries a warning.
  bool fit_euler = false;
  int max_iterations = 200;
  double relative_tolerance = 1e-12;
  /// Multiply the covariance by the reduced chi^2. Off gives the absolute
  /// covariance implied by the quoted uncertainties.
  bool scale_by_reduced_chi2 = true;
  double rank_tolerance = 1e-6;
  PhysicalConstants constants;
};

struct DegenerateSolution {
  HyperfineTensor tensor;
  double chi2 = 0.0;
  /// Orientation labels of the reported fit mapped onto the labels that carry
  /// the same crystal-frame tensor for this solution.
  std::vector<std::pair<std::string, std::string>> relabel;
};

struct FitResult {
  HyperfineTensor tensor;
  std::vector<std::string> parameter_names;
  Eigen::VectorXd parameters;
  Eigen::VectorXd uncertainties;
  Eigen::MatrixXd covariance;
  Vec3 principal_sigma_mhz = Vec3::Zero();
  Vec3 euler_sigma_deg = Vec3::Zero();  // zero for parameters held fixed
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  double rms_mhz = 0.0;
  int n_residuals = 0;
  int dof = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<DegenerateSolution> degenerate;
  std::vector<int> unmatched_records;
  std::vector<std::string> warnings;
};

class UnderdeterminedFitError : public Error {
 public:
  UnderdeterminedFitError(const std::string& what, std::vector<std::string> directions, FitResult best)
      : Error(what), directions(std::move(directions)), best(std::move(best)) {}
  std::vector<std::string> directions;
  FitResult best;
};

class FitConvergenceError : public Error {
 public:
  FitConvergenceError(const std::string& what, FitResult best) : Error(what), best(std::move(best)) {}
  FitResult best;
};

/// Weighted chi^2 with the peak assignment solved for this tensor.
double fit_cost(const ResonanceDataset& data, const HyperfineTensor& tensor,
                const FitOptions& options = {});

/// Candidate tensors from the three largest zero-field lines: the four zero
/// field levels are 1/4 (s . A) over the sign triples with s_x s_y s_z = -1,
/// so every assignment of measured levels to triples yields principal values.
std::vector<HyperfineTensor> zero_field_candidates(double f1_mhz, double f2_mhz, double f3_mhz);

/// Best starting point from zero-field lines in the data and a grid over gamma.
/// Throws Error when the dataset has fewer than three distinct zero-field lines.
HyperfineTensor default_initialization(const ResonanceDataset& data, const FitOptions& options = {});

/// Damped least squares over (A_X, A_Y, A_Z, gamma) with (alpha, beta) held at
/// the initial values, or over all six in fit_euler mode. Uses
/// default_initialization when `init` is empty.
FitResult fit_tensor(const ResonanceDataset& data, std::optional<HyperfineTensor> init = std::nullopt,
                     const FitOptions& options = {});

/// (J^T W J)^-1, times the reduced chi^2 when the options ask for it.
/// Throws UnderdeterminedFitError when J^T W J is singular.
Eigen::MatrixXd fit_uncertainties(const ResonanceDataset& data, const FitResult& result,
                                  const FitOptions& options = {});

/// Lines of every distinct orientation subset at each field, one record per
/// line, frequencies perturbed by N(0, noise) and tagged with `sigma`.
ResonanceDataset synthesize_dataset(const HyperfineTensor& tensor, const std::vector<MagneticField>& fields,
                                    double noise_mhz, double sigma_mhz, std::uint64_t seed,
                                    bool with_subsets = true, bool with_pairs = false,
                                    const PhysicalConstants& c = {});

/// Zero field plus 0.5, 1.0, 1.5, 2.0 mT along [001], [110] and [111].
std::vector<MagneticField> odmr_field_grid();

struct Peak {
  double freq_mhz = 0.0;
  double height = 0.0;
  double fwhm_mhz = 0.0;
  bool resolved = true;
};

/// Local maxima above `min_relative_height` of the tallest, refined by a
/// parabola through the three top samples. A peak whose half-maximum width
/// exceeds 1.15 linewidths, or whose half-maximum is never reached before the
/// next peak, is reported unresolved.
std::vector<Peak> extract_peaks(const SpectrumProfile& profile, double min_relative_height = 0.05);

}  // namespace tcentre
