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

#include "tcentre/decoherence.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace tcentre {

namespace {

// exp(-T/tau) weighted integral of exp(i delta T) over [0, t], times 1/tau.
Complex lifetime_integral(double delta, double t, double tau) {
  return (1.0 - std::exp(Complex(-t / tau, delta * t))) / (1.0 - kI * delta * tau);
}

// Trajectory amplitudes on the final eigenbasis are
//   exp(-i lam_k t) sum_m w_km exp(i (lam_k - mu_m) T),  w = K diag(c).
// Returns the unnormalised average; its trace is 1 - exp(-t/tau).
MatXc trajectory_average(const Eigen::VectorXd& lam, const MatXc& k, const Eigen::VectorXd& mu, const VecXc& c,
                         double t, double tau) {
  const Eigen::Index n = lam.size();
  const MatXc w = k * c.asDiagonal();
  MatXc rho = MatXc::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      Complex sum = 0.0;
      for (Eigen::Index m = 0; m < mu.size(); ++m)
        for (Eigen::Index mp = 0; mp < mu.size(); ++mp) {
          const Complex ww = w(a, m) * std::conj(w(b, mp));
          if (ww == 0.0) continue;
          sum += ww * lifetime_integral((lam[a] - mu[m]) - (lam[b] - mu[mp]), t, tau);
        }
      rho(a, b) = sum * std::exp(-kI * (lam[a] - lam[b]) * t);
      rho(b, a) = std::conj(rho(a, b));
    }
  }
  return rho;
}

double emitted(double t, double tau) { return -std::expm1(-t / tau); }

void require_long_time(double t, double tau, bool allow) {
  if (!allow && t < 10.0 * tau) {
    throw RegimeError("evolution time must be at least 10 lifetimes (override to allow shorter)");
  }
}

Vec2c project_on_electron(const Vec2c& e, const Vec4c& psi) {
  return Vec2c(std::conj(e[0]) * psi[0] + std::conj(e[1]) * psi[2], std::conj(e[0]) * psi[1] + std::conj(e[1]) * psi[3]);
}

Vec4c embed(const Vec2c& e, const Vec2c& n) { return Vec4c(e[0] * n[0], e[0] * n[1], e[1] * n[0], e[1] * n[1]); }

struct CycleSetup {
  BranchLevels levels;
  Vec2c e;
  Eigensystem excited;
  std::array<int, 2> branch;
};

CycleSetup setup(const CycleParams& p) {
  p.validate();
  CycleSetup s;
  s.levels = branch_levels(p.field, p.tensor, p.constants);
  s.e = electron_spinor(s.levels.direction, p.electron);
  s.excited = eigensystem(MatXc(excited_nuclear_hamiltonian(p.field, p.constants)));
  s.branch = s.levels.of(p.electron);
  return s;
}

Vec4c ground_state_for(const CycleSetup& s, const InitialState& init) {
  const MatXc& v = s.levels.es.vectors;
  switch (init.kind) {
    case InitialState::Kind::Eigenstate:
      if (init.index < 0 || init.index > 1) throw Error("eigenstate index must be 0 or 1");
      return v.col(s.branch[init.index]);
    case InitialState::Kind::Nuclear: {
      if (init.nuclear.norm() == 0.0) throw Error("initial nuclear state has zero norm");
      return embed(s.e, init.nuclear.normalized());
    }
    case InitialState::Kind::BranchSuperposition:
      break;
  }
  return (v.col(s.branch[0]) + v.col(s.branch[1])) / std::sqrt(2.0);
}

Vec2c excited_start(const CycleSetup& s, const Vec4c& psi0) {
  const Vec2c phi = project_on_electron(s.e, psi0);
  if (phi.norm() < 1e-12) throw Error("initial state has no weight on the excited electron branch");
  return phi.normalized();
}

// Conditional cycle state in the ground eigenbasis.
Mat4c closed_form_rho_eig(const CycleParams& p, const CycleSetup& s, const Vec4c& psi0) {
  const Vec2c phi0 = excited_start(s, psi0);
  const double t = p.t_s, tau = p.tau_s;
  const Mat4c& v = s.levels.es.vectors;
  if (t == 0.0) {
    const Vec4c psi = v.adjoint() * embed(s.e, phi0);
    return psi * psi.adjoint();
  }
  Eigen::Matrix<Complex, 4, 2> e_vh;
  for (int m = 0; m < 2; ++m) e_vh.col(m) = embed(s.e, s.excited.vectors.col(m));
  const MatXc k = v.adjoint() * e_vh;
  const VecXc c = s.excited.vectors.adjoint() * phi0;
  MatXc rho = trajectory_average(s.levels.es.values, k, s.excited.values, c, t, tau);
  return rho / rho.trace().real();
}

CycleOutcome outcome_from(const CycleParams& p, const CycleSetup& s, const Vec4c& psi0, const Mat4c& rho_lab,
                          const Mat4c& rho_flip_lab) {
  CycleOutcome out;
  const Mat4c& v = s.levels.es.vectors;
  out.rho = 0.5 * (rho_lab + rho_lab.adjoint());
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out.rho_nuclear(a, b) = out.rho(a, b) + out.rho(2 + a, 2 + b);
  out.emitted_fraction = emitted(p.t_s, p.tau_s);
  out.unresolved_hyperfine = p.unresolved_hyperfine();

  const Vec4c ref = propagator(s.levels.es, p.t_s) * psi0;
  out.fidelity = std::clamp((ref.adjoint() * out.rho * ref)(0, 0).real(), 0.0, 1.0);
  out.purity = (out.rho * out.rho).trace().real();

  const Mat4c rho_eig = v.adjoint() * out.rho * v;
  const Vec4c ref_eig = v.adjoint() * ref;
  const Complex coh = rho_eig(s.branch[0], s.branch[1]);
  const Complex coh_ref = ref_eig[s.branch[0]] * std::conj(ref_eig[s.branch[1]]);
  if (std::abs(coh_ref) > 1e-12 && std::abs(coh) > 0.0) out.mean_phase = std::arg(coh * std::conj(coh_ref));

  const Mat4c flip_eig = v.adjoint() * rho_flip_lab * v;
  out.flip_population = out.emitted_fraction * std::max(flip_eig(s.branch[1], s.branch[1]).real(), 0.0);
  out.p_flip = std::min(1.0, 2.0 * out.flip_population);
  return out;
}

Mat2c expm_hermitian(const Mat2c& h, double t) {
  return propagator(eigensystem(MatXc(h)), t);
}

}  // namespace

bool CycleParams::unresolved_hyperfine() const {
  const double max_a_hz = tensor.max_abs_angular() / kTwoPi;
  if (max_a_hz == 0.0) return true;
  return kTwoPi * tau_s < 0.1 / max_a_hz;
}

void CycleParams::validate() const {
  if (!(tau_s > 0.0) || !std::isfinite(tau_s)) throw Error("lifetime tau must be positive");
  if (!(t_s >= 0.0) || !std::isfinite(t_s)) throw Error("evolution time t must be >= 0");
}

Vec4c initial_ground_state(const CycleParams& params) {
  const CycleSetup s = setup(params);
  return ground_state_for(s, params.initial);
}

Vec4c trajectory_state(const CycleParams& params, double emission_time) {
  if (emission_time < 0.0 || emission_time > params.t_s) throw Error("emission time must lie in [0, t]");
  const CycleSetup s = setup(params);
  const Vec4c psi0 = ground_state_for(s, params.initial);
  const Vec2c phi = excited_start(s, psi0);
  const Vec2c excited = propagator(s.excited, emission_time) * phi;
  const Vec4c out = propagator(s.levels.es, params.t_s - emission_time) * embed(s.e, excited);
  return out.normalized();
}

CycleOutcome cycle_density_matrix(const CycleParams& params) {
  require_long_time(params.t_s, params.tau_s, params.allow_short_time);
  const CycleSetup s = setup(params);
  const Mat4c& v = s.levels.es.vectors;
  const Vec4c psi0 = ground_state_for(s, params.initial);
  const Mat4c rho = v * closed_form_rho_eig(params, s, psi0) * v.adjoint();
  const Vec4c start = v.col(s.branch[0]);
  const Mat4c rho_flip = v * closed_form_rho_eig(params, s, start) * v.adjoint();
  return outcome_from(params, s, psi0, rho, rho_flip);
}

namespace {

// Ground block of the master-equation state, normalised to trace 1.
Mat4c lindblad_ground_state(const CycleParams& p, const CycleSetup& s, const Vec4c& psi0) {
  constexpr int n = 6;
  const Vec2c phi0 = excited_start(s, psi0);
  const double tau = p.tau_s, t = p.t_s;
  if (t == 0.0) {
    const Vec4c g = embed(s.e, phi0);
    return g * g.adjoint();
  }

  // Energies are shifted within each block; excitation and decay never create
  // coherence between the blocks, so the offsets drop out.
  MatXc h = MatXc::Zero(n, n);
  const MatXc hh = build_excited_nuclear_hamiltonian(p.field, p.constants).matrix();
  const double offset = 0.5 * (s.levels.es.values[s.branch[0]] + s.levels.es.values[s.branch[1]]);
  h.block(0, 0, 2, 2) = hh;
  h.block(2, 2, 4, 4) =
      build_ground_hamiltonian(p.field, p.tensor, p.constants).matrix() - offset * MatXc::Identity(4, 4);
  MatXc l = MatXc::Zero(n, n);
  for (int s_e = 0; s_e < 2; ++s_e)
    for (int j = 0; j < 2; ++j) l(2 + 2 * s_e + j, j) = s.e[s_e] / std::sqrt(tau);

  const MatXc id = MatXc::Identity(n, n);
  const MatXc ldl = l.adjoint() * l;
  auto kron = [](const MatXc& a, const MatXc& b) {
    MatXc out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
  };
  // Column-stacking: vec(A X B) = (B^T (x) A) vec(X).
  const MatXc gen = -kI * (kron(id, h) - kron(h.transpose(), id)) + kron(l.conjugate(), l) -
                    0.5 * (kron(id, ldl) + kron(ldl.transpose(), id));

  MatXc rho0 = MatXc::Zero(n, n);
  rho0.block(0, 0, 2, 2) = phi0 * phi0.adjoint();
  const VecXc vec0 = Eigen::Map<const VecXc>(rho0.data(), n * n);

  const double scale = (gen * t).cwiseAbs().colwise().sum().maxCoeff();
  const int steps = std::max(1, static_cast<int>(std::ceil(scale / 64.0)));
  auto integrate = [&](int count) {
    const MatXc step = (gen * (t / count)).exp();
    VecXc v = vec0;
    for (int k = 0; k < count; ++k) v = step * v;
    return MatXc(Eigen::Map<const MatXc>(v.data(), n, n));
  };
  const MatXc coarse = integrate(steps);
  const MatXc fine = integrate(2 * steps);
  if (!fine.allFinite() || trace_distance(coarse, fine) > 1e-9) {
    throw Error("master-equation integrator failed its step-doubling check");
  }
  Mat4c g = fine.block(2, 2, 4, 4);
  g = 0.5 * (g + g.adjoint()).eval();
  return g / g.trace().real();
}

}  // namespace

CycleOutcome lindblad_oracle(const CycleParams& params) {
  require_long_time(params.t_s, params.tau_s, params.allow_short_time);
  const CycleSetup s = setup(params);
  const Vec4c psi0 = ground_state_for(s, params.initial);
  const Mat4c rho = lindblad_ground_state(params, s, psi0);
  const Mat4c rho_flip = lindblad_ground_state(params, s, s.levels.es.vectors.col(s.branch[0]));
  return outcome_from(params, s, psi0, rho, rho_flip);
}

double trace_distance(const MatXc& a, const MatXc& b) {
  const MatXc d = a - b;
  Eigen::SelfAdjointEigenSolver<MatXc> solver(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

EffectiveFieldGeometry effective_field_geometry(const MagneticField& b, const CrystalTensor& a, Branch branch,
                                                const PhysicalConstants& c) {
  if (!secular_regime(b, a, c)) throw RegimeError("field below the secular guard");
  const Vec3 dir = b.direction();
  const Vec3 s = (branch == Branch::Up ? 0.5 : -0.5) * dir;
  EffectiveFieldGeometry g;
  g.f_tesla = a.angular() * s / c.gamma_n();
  g.b_eff_tesla = b.tesla() - g.f_tesla;
  g.theta_q = std::atan2(b.tesla().cross(g.b_eff_tesla).norm(), b.tesla().dot(g.b_eff_tesla));
  g.a = 0.5 * (1.0 + std::cos(g.theta_q));
  return g;
}

double flip_probability_limit(const EffectiveFieldGeometry& g) { return 4.0 * g.a * (1.0 - g.a); }

double cyclicity(const CycleParams& params) {
  const double p = cycle_density_matrix(params).p_flip;
  return p < 1e-15 ? std::numeric_limits<double>::infinity() : 1.0 / p;
}

Vec3 excited_state_mean_moment(const CycleParams& params, int index) {
  CycleParams p = params;
  p.initial = InitialState::eigenstate(index);
  const CycleSetup s = setup(p);
  const Vec2c phi0 = excited_start(s, ground_state_for(s, p.initial));
  const Mat2c& vh = s.excited.vectors;
  const Vec2c c = vh.adjoint() * phi0;
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    const Mat2c op = vh.adjoint() * spin_half_operators()[i] * vh;
    Complex sum = 0.0;
    for (int m = 0; m < 2; ++m)
      for (int mp = 0; mp < 2; ++mp) {
        const double delta = s.excited.values[mp] - s.excited.values[m];
        sum += std::conj(c[mp]) * c[m] * op(mp, m) / (1.0 - kI * delta * p.tau_s);
      }
    out[i] = sum.real();
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct DpmFrame {
  bool exists = false;
  int index = 0;
  Vec3 u, p, q;
};

DpmFrame dpm_frame(const CrystalTensor& a, double b, Branch ref, const PhysicalConstants& c) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(a.angular());
  const Mat3 axes = solver.eigenvectors();
  std::array<double, 3> d{};
  for (int i = 0; i < 3; ++i) d[i] = delta_h(MagneticField(axes.col(i) * b), a, ref, c);
  DpmFrame f;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3, k = (i + 2) % 3;
    if (d[i] != 0.0 && std::signbit(d[j]) == std::signbit(d[k]) && std::signbit(d[i]) != std::signbit(d[j]) &&
        d[j] != 0.0 && d[k] != 0.0) {
      f.exists = true;
      f.index = i;
      f.u = axes.col(i);
      f.p = axes.col(j);
      f.q = f.u.cross(f.p);
    }
  }
  return f;
}

Vec3 frame_direction(const DpmFrame& f, double polar, double psi) {
  return std::cos(polar) * f.u + std::sin(polar) * (std::cos(psi) * f.p + std::sin(psi) * f.q);
}

std::optional<Vec3> frame_point(const DpmFrame& f, const CrystalTensor& a, double b, double psi, Branch ref,
                                const PhysicalConstants& c) {
  auto dh = [&](double polar) { return delta_h(MagneticField(frame_direction(f, polar, psi) * b), a, ref, c); };
  constexpr int samples = 64;
  const double half_pi = 0.5 * std::numbers::pi;
  double lo = 0.0;
  double f_lo = dh(lo);
  for (int i = 1; i <= samples; ++i) {
    const double hi = half_pi * i / samples;
    const double f_hi = dh(hi);
    if (std::signbit(f_hi) == std::signbit(f_lo) && f_hi != 0.0) {
      lo = hi;
      f_lo = f_hi;
      continue;
    }
    double x0 = lo, x1 = hi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (x0 + x1);
      const double fm = dh(mid);
      if (std::abs(fm) < 1e-8 || x1 - x0 < 1e-15) return frame_direction(f, mid, psi);
      if (std::signbit(fm) == std::signbit(f_lo)) x0 = mid;
      else x1 = mid;
    }
    return frame_direction(f, 0.5 * (x0 + x1), psi);
  }
  return std::nullopt;
}

std::pair<double, double> to_spherical(const Vec3& d) {
  const Vec3 u = d.normalized();
  double phi = std::atan2(u.y(), u.x());
  if (phi < 0.0) phi += kTwoPi;
  return {std::acos(std::clamp(u.z(), -1.0, 1.0)), phi};
}

}  // namespace

std::optional<Vec3> dpm_point(const CrystalTensor& a, double b, double psi, Branch reference,
                              const PhysicalConstants& c) {
  if (!secular_regime(MagneticField(Vec3(0, 0, b)), a, c)) throw RegimeError("field below the secular guard");
  const DpmFrame f = dpm_frame(a, b, reference, c);
  if (!f.exists) return std::nullopt;
  return frame_point(f, a, b, psi, reference, c);
}

DpmContour dpm_contour(const CrystalTensor& a, double b, int resolution, Branch reference,
                       const PhysicalConstants& c) {
  if (resolution < 3) throw Error("contour resolution must be at least 3");
  if (!secular_regime(MagneticField(Vec3(0, 0, b)), a, c)) throw RegimeError("field below the secular guard");
  DpmContour out;
  const DpmFrame f = dpm_frame(a, b, reference, c);
  if (!f.exists) return out;
  out.axis = f.u;
  out.axis_index = f.index;

  auto delta_e = [&](const Vec3& d) { return effective_hyperfine(MagneticField(d * b), a, c).delta_e_mhz; };
  std::vector<Vec3> points;
  std::vector<double> psis;
  for (int j = 0; j < resolution; ++j) {
    const double psi = kTwoPi * j / resolution;
    if (const auto d = frame_point(f, a, b, psi, reference, c)) {
      points.push_back(*d);
      psis.push_back(psi);
    }
  }
  if (points.empty()) return out;
  out.exists = true;
  std::vector<std::pair<double, double>> plus, minus;
  for (const auto& d : points) {
    plus.push_back(to_spherical(d));
    minus.push_back(to_spherical(-d));
  }
  plus.push_back(plus.front());
  minus.push_back(minus.front());
  out.curves = {std::move(plus), std::move(minus)};

  std::size_t best = 0;
  std::vector<double> de(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    de[k] = delta_e(points[k]);
    if (de[k] > de[best]) best = k;
  }
  // golden-section refinement between the neighbouring azimuths
  const double step = kTwoPi / resolution;
  double x0 = psis[best] - step, x1 = psis[best] + step;
  auto value = [&](double psi) {
    const auto d = frame_point(f, a, b, psi, reference, c);
    return d ? delta_e(*d) : -std::numeric_limits<double>::infinity();
  };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double xa = x1 - g * (x1 - x0), xb = x0 + g * (x1 - x0);
  double fa = value(xa), fb = value(xb);
  for (int it = 0; it < 60; ++it) {
    if (fa > fb) {
      x1 = xb;
      xb = xa;
      fb = fa;
      xa = x1 - g * (x1 - x0);
      fa = value(xa);
    } else {
      x0 = xa;
      xa = xb;
      fa = fb;
      xb = x0 + g * (x1 - x0);
      fb = value(xb);
    }
  }
  const double psi_best = 0.5 * (x0 + x1);
  const auto d_best = frame_point(f, a, b, psi_best, reference, c);
  out.max_delta_e_mhz = de[best];
  out.max_delta_e_direction = points[best];
  if (d_best) {
    const double v = delta_e(*d_best);
    if (v > out.max_delta_e_mhz) {
      out.max_delta_e_mhz = v;
      out.max_delta_e_direction = *d_best;
    }
  }
  return out;
}

ProtectionScaling dpm_protection_scaling(const CrystalTensor& a, const std::vector<double>& fields, double psi,
                                         const PhysicalConstants& c) {
  ProtectionScaling out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double b : fields) {
    const auto d = dpm_point(a, b, psi, Branch::Up, c);
    if (!d) throw RegimeError("no dephasing-protection manifold for this tensor");
    CycleParams p;
    p.field = MagneticField(*d * b);
    p.tensor = a;
    p.constants = c;
    const double larmor_hz = c.gamma_n() * b / kTwoPi;
    p.tau_s = 1000.0 / larmor_hz;
    p.t_s = 20.0 * p.tau_s;
    p.initial = InitialState::eigenstate(0);
    const double pf = cycle_density_matrix(p).p_flip;
    out.field_t.push_back(b);
    out.p_flip.push_back(pf);
    const double x = std::log(b), y = std::log(pf);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(fields.size());
  if (n >= 2) out.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct BranchNuclear {
  Mat2c h;
  Mat2c vectors;
};

BranchNuclear branch_nuclear(const MagneticField& b, const CrystalTensor& a, Branch branch,
                             const PhysicalConstants& c) {
  const BranchLevels lv = branch_levels(b, a, c);
  const Vec2c e = electron_spinor(lv.direction, branch);
  const auto idx = lv.of(branch);
  Mat2c m;
  for (int k = 0; k < 2; ++k) m.col(k) = project_on_electron(e, lv.es.vectors.col(idx[k]));
  Eigen::JacobiSVD<Mat2c> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  BranchNuclear out;
  out.vectors = svd.matrixU() * svd.matrixV().adjoint();
  const double l0 = lv.es.values[idx[0]], l1 = lv.es.values[idx[1]];
  const double mean = 0.5 * (l0 + l1);
  out.h = (l0 - mean) * out.vectors.col(0) * out.vectors.col(0).adjoint() +
          (l1 - mean) * out.vectors.col(1) * out.vectors.col(1).adjoint();
  out.h = 0.5 * (out.h + out.h.adjoint()).eval();
  return out;
}

}  // namespace

Mat2c branch_nuclear_hamiltonian(const MagneticField& b, const CrystalTensor& a, Branch branch,
                                 const PhysicalConstants& c) {
  return branch_nuclear(b, a, branch, c).h;
}

Mat2c excited_nuclear_hamiltonian(const MagneticField& b, const PhysicalConstants& c) {
  return build_excited_nuclear_hamiltonian(b, c).matrix();
}

Mat2c average_unitary(double t, double tau, const Mat2c& h_e, const Mat2c& h_h, bool allow_short_time) {
  if (!(tau > 0.0) || !(t >= 0.0)) throw Error("average evolution needs tau > 0 and t >= 0");
  require_long_time(t, tau, allow_short_time);
  const Eigensystem se = eigensystem(MatXc(h_e));
  const Eigensystem sh = eigensystem(MatXc(h_h));
  Mat2c u = Mat2c::Zero();
  for (int k = 0; k < 2; ++k) {
    const Mat2c pk = se.vectors.col(k) * se.vectors.col(k).adjoint();
    for (int m = 0; m < 2; ++m) {
      const Mat2c pm = sh.vectors.col(m) * sh.vectors.col(m).adjoint();
      u += std::exp(-kI * se.values[k] * t) * lifetime_integral(se.values[k] - sh.values[m], t, tau) * pk * pm;
    }
  }
  return u;
}

Mat2c correction_unitary(double t, double tau, const Mat2c& h_e, const Mat2c& h_h, bool allow_short_time) {
  const Mat2c u = average_unitary(t, tau, h_e, h_h, allow_short_time);
  Eigen::JacobiSVD<Mat2c> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  if (!(s[0] > 0.0) || s[1] < 1e-12 * s[0]) {
    throw RegimeError("average evolution is singular; the memory has fully dephased");
  }
  const Mat2c w = svd.matrixU() * svd.matrixV().adjoint();
  return expm_hermitian(h_e, t) * w.adjoint();
}

Mat2c detection_correction(double t, double emission_time, const Mat2c& h_e, const Mat2c& h_h) {
  if (emission_time < 0.0 || emission_time > t) throw Error("emission time must lie in [0, t]");
  return expm_hermitian(h_h, emission_time).adjoint() * expm_hermitian(h_e, t - emission_time).adjoint();
}

NuclearMemory nuclear_memory(const CycleParams& params) {
  params.validate();
  const BranchNuclear bn = branch_nuclear(params.field, params.tensor, params.electron, params.constants);
  NuclearMemory m;
  m.h_e = bn.h;
  m.h_h = excited_nuclear_hamiltonian(params.field, params.constants);
  m.branch_vectors = bn.vectors;
  switch (params.initial.kind) {
    case InitialState::Kind::Eigenstate:
      if (params.initial.index < 0 || params.initial.index > 1) throw Error("eigenstate index must be 0 or 1");
      m.psi0 = bn.vectors.col(params.initial.index);
      break;
    case InitialState::Kind::Nuclear:
      if (params.initial.nuclear.norm() == 0.0) throw Error("initial nuclear state has zero norm");
      m.psi0 = params.initial.nuclear.normalized();
      break;
    case InitialState::Kind::BranchSuperposition:
      m.psi0 = (bn.vectors.col(0) + bn.vectors.col(1)) / std::sqrt(2.0);
      break;
  }
  return m;
}

Mat2c nuclear_cycle_state(const NuclearMemory& m, double t, double tau) {
  if (t == 0.0) return m.psi0 * m.psi0.adjoint();
  const Eigensystem se = eigensystem(MatXc(m.h_e));
  const Eigensystem sh = eigensystem(MatXc(m.h_h));
  const MatXc k = se.vectors.adjoint() * sh.vectors;
  const VecXc c = sh.vectors.adjoint() * m.psi0;
  MatXc rho = trajectory_average(se.values, k, sh.values, c, t, tau);
  rho /= rho.trace().real();
  Mat2c lab = se.vectors * rho * se.vectors.adjoint();
  return 0.5 * (lab + lab.adjoint());
}

CorrectedOutcome corrected_outcome(const CycleParams& params) {
  require_long_time(params.t_s, params.tau_s, params.allow_short_time);
  NuclearMemory m = nuclear_memory(params);
  const double t = params.t_s, tau = params.tau_s;
  CorrectedOutcome out;
  out.u_avg = average_unitary(t, tau, m.h_e, m.h_h, params.allow_short_time);
  out.u_corr = correction_unitary(t, tau, m.h_e, m.h_h, params.allow_short_time);
  const Mat2c ue = expm_hermitian(m.h_e, t);

  const Mat2c rho = nuclear_cycle_state(m, t, tau);
  const Vec2c ref = ue * m.psi0;
  const Mat2c rho_c = out.u_corr * rho * out.u_corr.adjoint();
  out.fidelity = std::clamp((ref.adjoint() * rho * ref)(0, 0).real(), 0.0, 1.0);
  out.corrected_fidelity = std::clamp((ref.adjoint() * rho_c * ref)(0, 0).real(), 0.0, 1.0);

  m.psi0 = m.branch_vectors.col(0);
  const Mat2c flip = nuclear_cycle_state(m, t, tau);
  const Mat2c flip_c = out.u_corr * flip * out.u_corr.adjoint();
  const Vec2c other = m.branch_vectors.col(1);
  const double w = 2.0 * emitted(t, tau);
  out.p_flip = std::min(1.0, w * std::max((other.adjoint() * flip * other)(0, 0).real(), 0.0));
  out.corrected_p_flip = std::min(1.0, w * std::max((other.adjoint() * flip_c * other)(0, 0).real(), 0.0));
  return out;
}

double detection_feedback_fidelity(const CycleParams& params, double fraction, int samples) {
  if (fraction < 0.0 || fraction > 1.0) throw Error("detection fraction must lie in [0, 1]");
  if (samples < 1) throw Error("need at least one emission-time sample");
  require_long_time(params.t_s, params.tau_s, params.allow_short_time);
  const NuclearMemory m = nuclear_memory(params);
  const double t = params.t_s, tau = params.tau_s;
  const Mat2c ue = expm_hermitian(m.h_e, t);
  const Vec2c ref = ue * m.psi0;

  const Mat2c undetected = nuclear_cycle_state(m, t, tau);
  Mat2c detected = Mat2c::Zero();
  const double e = emitted(t, tau);
  for (int j = 0; j < samples; ++j) {
    const double u = (j + 0.5) / samples;
    const double emission = std::min(t, -tau * std::log1p(-u * e));
    Vec2c psi = expm_hermitian(m.h_e, t - emission) * expm_hermitian(m.h_h, emission) * m.psi0;
    psi = ue * detection_correction(t, emission, m.h_e, m.h_h) * psi;
    detected += psi * psi.adjoint() / static_cast<double>(samples);
  }
  const Mat2c rho = fraction * detected + (1.0 - fraction) * undetected;
  return std::clamp((ref.adjoint() * rho * ref)(0, 0).real(), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

std::optional<MapMetric> parse_map_metric(const std::string& name) {
  if (name == "cyclicity") return MapMetric::Cyclicity;
  if (name == "delta_h") return MapMetric::DeltaH;
  if (name == "delta_e") return MapMetric::DeltaE;
  if (name == "corrected-fidelity" || name == "corrected_fidelity") return MapMetric::CorrectedFidelity;
  return std::nullopt;
}

std::string to_string(MapMetric m) {
  switch (m) {
    case MapMetric::Cyclicity: return "cyclicity";
    case MapMetric::DeltaH: return "delta_h";
    case MapMetric::DeltaE: return "delta_e";
    case MapMetric::CorrectedFidelity: return "corrected-fidelity";
  }
  return "unknown";
}

DirectionMap map_over_directions(const CrystalTensor& a, const MapRequest& r, const PhysicalConstants& c) {
  if (r.n_theta < 2 || r.n_phi < 2) throw Error("direction map needs at least 2 x 2 nodes");
  DirectionMap out;
  out.metric = r.metric;
  for (int i = 0; i < r.n_theta; ++i)
    out.theta.push_back(r.window.theta_min + (r.window.theta_max - r.window.theta_min) * i / (r.n_theta - 1));
  for (int j = 0; j < r.n_phi; ++j)
    out.phi.push_back(r.window.phi_min + (r.window.phi_max - r.window.phi_min) * j / r.n_phi);
  out.values.assign(out.theta.size() * out.phi.size(), 0.0);

  auto evaluate = [&](double theta, double phi) {
    const MagneticField b = MagneticField::spherical(r.b_magnitude_t, theta, phi);
    switch (r.metric) {
      case MapMetric::DeltaH: return delta_h(b, a, Branch::Up, c);
      case MapMetric::DeltaE: return effective_hyperfine(b, a, c).delta_e_mhz;
      case MapMetric::Cyclicity:
      case MapMetric::CorrectedFidelity: {
        CycleParams p;
        p.field = b;
        p.tensor = a;
        p.tau_s = r.tau_s;
        p.t_s = r.t_s;
        p.constants = c;
        if (r.metric == MapMetric::Cyclicity) {
          p.initial = InitialState::eigenstate(0);
          return cyclicity(p);
        }
        return corrected_outcome(p).corrected_fidelity;
      }
    }
    return 0.0;
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned n_threads = std::min<unsigned>(r.threads ? r.threads : hw, static_cast<unsigned>(r.n_theta));
  std::atomic<int> next_row{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next_row++; i < r.n_theta; i = next_row++) {
      try {
        for (std::size_t j = 0; j < out.phi.size(); ++j)
          out.values[i * out.phi.size() + j] = evaluate(out.theta[i], out.phi[j]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace tcentre
