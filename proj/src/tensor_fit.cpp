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

#include "tcentre/tensor_fit.hpp"
#include "tcentre/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>

namespace tcentre {

namespace {

constexpr int kOrientations = 12;

struct LineRef {
  int orientation = -1;
  int lower = -1;
  int upper = -1;
};

struct Group {
  int field = 0;
  int orientation = -1;  // -1: lines may come from any orientation
  std::vector<int> free_records;
  std::vector<int> paired_records;
};

Eigen::Vector4d ground_levels(const Vec3& field, const CrystalTensor& a, const PhysicalConstants& c) {
  const Mat4c h = build_ground_hamiltonian(MagneticField(field), a, c).matrix();
  Eigen::SelfAdjointEigenSolver<Mat4c> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues() / mhz_to_angular(1.0);
}

class FitModel {
 public:
  FitModel(const ResonanceDataset& data, const FitOptions& options, const HyperfineTensor& frame)
      : data_(data), options_(options), frame_(frame) {
    std::map<std::pair<int, int>, int> index;
    for (std::size_t i = 0; i < data.records.size(); ++i) {
      const auto& r = data.records[i];
      int f = -1;
      for (std::size_t k = 0; k < fields_.size(); ++k)
        if (fields_[k] == r.field_t) f = static_cast<int>(k);
      if (f < 0) {
        f = static_cast<int>(fields_.size());
        fields_.push_back(r.field_t);
      }
      int o = -1;
      if (r.subset) {
        const auto idx = orientation_index(*r.subset);
        if (!idx) throw ParseError("unknown orientation subset label '" + *r.subset + "'");
        o = *idx;
      }
      auto [it, fresh] = index.try_emplace({f, o}, static_cast<int>(groups_.size()));
      if (fresh) groups_.push_back({f, o, {}, {}});
      auto& g = groups_[it->second];
      (r.pair ? g.paired_records : g.free_records).push_back(static_cast<int>(i));
    }
  }

  int n_params() const { return options_.fit_euler ? 6 : 4; }

  std::vector<std::string> names() const {
    if (options_.fit_euler) return {"A_X", "A_Y", "A_Z", "alpha", "beta", "gamma"};
    return {"A_X", "A_Y", "A_Z", "gamma"};
  }

  Eigen::VectorXd params(const HyperfineTensor& t) const {
    Eigen::VectorXd p(n_params());
    p.head<3>() = t.principal_mhz;
    if (options_.fit_euler) p.tail<3>() = t.euler_deg;
    else p[3] = t.euler_deg.z();
    return p;
  }

  HyperfineTensor tensor(const Eigen::VectorXd& p) const {
    HyperfineTensor t = frame_;
    t.principal_mhz = p.head<3>();
    if (options_.fit_euler) t.euler_deg = p.tail<3>();
    else t.euler_deg.z() = p[3];
    return t;
  }

  // Levels in MHz for every (field, orientation) the data refers to.
  struct Levels {
    std::vector<std::array<std::optional<Eigen::Vector4d>, kOrientations>> table;
    const Eigen::Vector4d& get(int f, int o) const { return *table[f][o]; }
  };

  Levels levels(const HyperfineTensor& t, bool all_orientations) const {
    const CrystalTensor z0 = CrystalTensor::from(t);
    std::array<CrystalTensor, kOrientations> rotated;
    const auto& set = orientation_set();
    for (int o = 0; o < kOrientations; ++o) rotated[o] = tensor_for_orientation(z0, set[o]);
    Levels lv;
    lv.table.resize(fields_.size());
    auto fill = [&](int f, int o) {
      if (!lv.table[f][o]) lv.table[f][o] = ground_levels(fields_[f], rotated[o], options_.constants);
    };
    for (const auto& g : groups_) {
      if (g.orientation >= 0 && !all_orientations) fill(g.field, g.orientation);
      else
        for (int o = 0; o < kOrientations; ++o) fill(g.field, o);
    }
    return lv;
  }

  std::vector<LineRef> assign(const HyperfineTensor& t) const {
    bool need_all = false;
    for (const auto& g : groups_) need_all |= g.orientation < 0;
    const Levels lv = levels(t, need_all);
    std::vector<LineRef> refs(data_.records.size());
    for (const auto& g : groups_) {
      struct Line {
        double f;
        LineRef ref;
      };
      std::vector<Line> lines;
      const int o_lo = g.orientation >= 0 ? g.orientation : 0;
      const int o_hi = g.orientation >= 0 ? g.orientation + 1 : kOrientations;
      for (int o = o_lo; o < o_hi; ++o) {
        const auto& e = lv.get(g.field, o);
        for (int lo = 0; lo < 4; ++lo)
          for (int hi = lo + 1; hi < 4; ++hi) lines.push_back({e[hi] - e[lo], {o, lo, hi}});
      }
      std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.f < b.f; });
      if (g.orientation < 0) {
        // equivalent orientations repeat the same lines
        std::vector<Line> unique;
        for (const auto& l : lines)
          if (unique.empty() || l.f - unique.back().f > 1e-7) unique.push_back(l);
        lines = std::move(unique);
      }
      for (int r : g.paired_records) {
        const auto [lo, hi] = *data_.records[r].pair;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& l : lines) {
          if (l.ref.lower != lo || l.ref.upper != hi) continue;
          const double d = std::abs(l.f - data_.records[r].freq_mhz);
          if (d < best) {
            best = d;
            refs[r] = l.ref;
          }
        }
        if (g.orientation < 0 && !std::isfinite(best)) {
          // deduplication may have dropped the hinted pair; fall back to z0
          if (lo >= 0 && hi < 4 && lo < hi) refs[r] = {0, lo, hi};
        }
      }
      if (g.free_records.empty()) continue;
      std::vector<double> predicted, observed;
      for (const auto& l : lines) predicted.push_back(l.f);
      for (int r : g.free_records) observed.push_back(data_.records[r].freq_mhz);
      const Assignment a = assign_peaks(predicted, observed);
      for (std::size_t k = 0; k < g.free_records.size(); ++k) {
        const int j = a.observed_to_predicted[k];
        if (j >= 0) refs[g.free_records[k]] = lines[j].ref;
      }
    }
    return refs;
  }

  Eigen::VectorXd residuals(const HyperfineTensor& t, const std::vector<LineRef>& refs) const {
    const CrystalTensor z0 = CrystalTensor::from(t);
    std::vector<std::array<std::optional<Eigen::Vector4d>, kOrientations>> cache(fields_.size());
    std::array<std::optional<CrystalTensor>, kOrientations> rotated;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data_.records.size()));
    for (std::size_t i = 0; i < data_.records.size(); ++i) {
      const LineRef& ref = refs[i];
      if (ref.orientation < 0) continue;
      const int f = field_of(i);
      auto& slot = cache[f][ref.orientation];
      if (!slot) {
        auto& rt = rotated[ref.orientation];
        if (!rt) rt = tensor_for_orientation(z0, orientation_set()[ref.orientation]);
        slot = ground_levels(fields_[f], *rt, options_.constants);
      }
      const double pred = (*slot)[ref.upper] - (*slot)[ref.lower];
      const auto& rec = data_.records[i];
      r[static_cast<Eigen::Index>(i)] = (rec.freq_mhz - pred) / rec.sigma_mhz;
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& p, const std::vector<LineRef>& refs) const {
    Eigen::MatrixXd j(static_cast<Eigen::Index>(data_.records.size()), n_params());
    for (int k = 0; k < n_params(); ++k) {
      const bool angle = options_.fit_euler ? k >= 3 : k == 3;
      const double h = angle ? 1e-5 : 1e-6 * std::max(1.0, std::abs(p[k]));
      Eigen::VectorXd plus = p, minus = p;
      plus[k] += h;
      minus[k] -= h;
      j.col(k) = (residuals(tensor(plus), refs) - residuals(tensor(minus), refs)) / (2.0 * h);
    }
    return j;
  }

  double cost(const HyperfineTensor& t) const { return residuals(t, assign(t)).squaredNorm(); }

  int field_of(std::size_t record) const {
    const Vec3& b = data_.records[record].field_t;
    for (std::size_t k = 0; k < fields_.size(); ++k)
      if (fields_[k] == b) return static_cast<int>(k);
    return 0;
  }

 private:
  const ResonanceDataset& data_;
  FitOptions options_;
  HyperfineTensor frame_;
  std::vector<Vec3> fields_;
  std::vector<Group> groups_;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  out.push_back(trim(cell));
  return out;
}

double parse_number(const std::string& s, const std::string& column, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": column " + column + ": not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

void ResonanceDataset::validate() const {
  if (records.size() < 8) throw Error("dataset needs at least 8 records for a well-posed fit");
  std::vector<Vec3> directions;
  for (const auto& r : records) {
    if (!(r.sigma_mhz > 0.0)) throw Error("every record needs sigma_MHz > 0");
    if (r.field_t.norm() == 0.0) continue;
    const Vec3 d = r.field_t.normalized();
    bool seen = false;
    for (const auto& e : directions) seen |= (e - d).norm() < 1e-9;
    if (!seen) directions.push_back(d);
  }
  if (directions.size() < 2) throw Error("dataset must span at least two field directions");
}

ResonanceDataset ResonanceDataset::read_csv(std::istream& in) {
  ResonanceDataset out;
  std::string line;
  std::vector<std::string> header;
  int number = 0;
  int col_subset = -1, col_pair = -1;
  const std::array<std::string, 5> required{"Bx_T", "By_T", "Bz_T", "freq_MHz", "sigma_MHz"};
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto cells = split(line, ',');
    if (header.empty()) {
      header = cells;
      if (header.size() < required.size()) throw ParseError("header: expected " + std::string("Bx_T,By_T,Bz_T,freq_MHz,sigma_MHz"));
      for (std::size_t k = 0; k < required.size(); ++k)
        if (header[k] != required[k]) throw ParseError("header: column " + std::to_string(k + 1) + " must be " + required[k]);
      for (std::size_t k = required.size(); k < header.size(); ++k) {
        if (header[k] == "subset") col_subset = static_cast<int>(k);
        else if (header[k] == "pair") col_pair = static_cast<int>(k);
        else throw ParseError("header: unknown column '" + header[k] + "'");
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(number) + ": expected " + std::to_string(header.size()) + " columns");
    }
    ResonanceRecord r;
    for (int k = 0; k < 3; ++k) r.field_t[k] = parse_number(cells[k], required[k], number);
    r.freq_mhz = parse_number(cells[3], "freq_MHz", number);
    r.sigma_mhz = parse_number(cells[4], "sigma_MHz", number);
    if (!(r.sigma_mhz > 0.0)) throw ParseError("line " + std::to_string(number) + ": column sigma_MHz must be > 0");
    if (col_subset >= 0 && !cells[col_subset].empty()) {
      if (!orientation_index(cells[col_subset])) {
        throw ParseError("line " + std::to_string(number) + ": column subset: unknown label '" + cells[col_subset] + "'");
      }
      r.subset = cells[col_subset];
    }
    if (col_pair >= 0 && !cells[col_pair].empty()) {
      const auto dash = cells[col_pair].find('-');
      if (dash == std::string::npos) throw ParseError("line " + std::to_string(number) + ": column pair must be lower-upper");
      const double lo = parse_number(cells[col_pair].substr(0, dash), "pair", number);
      const double hi = parse_number(cells[col_pair].substr(dash + 1), "pair", number);
      if (lo < 0 || hi > 3 || lo >= hi || lo != std::floor(lo) || hi != std::floor(hi)) {
        throw ParseError("line " + std::to_string(number) + ": column pair must name two levels 0..3, lower first");
      }
      r.pair = std::make_pair(static_cast<int>(lo), static_cast<int>(hi));
    }
    out.records.push_back(std::move(r));
  }
  if (header.empty()) throw ParseError("missing header line");
  return out;
}

void ResonanceDataset::write_csv(std::ostream& out) const {
  bool any_subset = false, any_pair = false;
  for (const auto& r : records) {
    any_subset |= r.subset.has_value();
    any_pair |= r.pair.has_value();
  }
  out << "Bx_T,By_T,Bz_T,freq_MHz,sigma_MHz";
  if (any_subset) out << ",subset";
  if (any_pair) out << ",pair";
  out << '\n';
  for (const auto& r : records) {
    out << format_double(r.field_t.x()) << ',' << format_double(r.field_t.y()) << ','
        << format_double(r.field_t.z()) << ',' << format_double(r.freq_mhz) << ',' << format_double(r.sigma_mhz);
    if (any_subset) out << ',' << r.subset.value_or("");
    if (any_pair) {
      out << ',';
      if (r.pair) out << r.pair->first << '-' << r.pair->second;
    }
    out << '\n';
  }
}

Assignment assign_peaks(std::span<const double> predicted, std::span<const double> observed) {
  Assignment out;
  const int n_obs = static_cast<int>(observed.size());
  const int n_pred = static_cast<int>(predicted.size());
  out.observed_to_predicted.assign(n_obs, -1);
  if (n_obs == 0 || n_pred == 0) {
    for (int i = 0; i < n_obs; ++i) out.unmatched_observed.push_back(i);
    for (int j = 0; j < n_pred; ++j) out.unmatched_predicted.push_back(j);
    return out;
  }
  // Rank predictions by frequency; a vanishing penalty on rank settles ties
  // in favour of the lower line.
  std::vector<int> rank(n_pred);
  {
    std::vector<int> order(n_pred);
    for (int j = 0; j < n_pred; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return predicted[a] < predicted[b]; });
    for (int k = 0; k < n_pred; ++k) rank[order[k]] = k;
  }
  auto cost = [&](int i, int j) { return std::abs(observed[i] - predicted[j]) + 1e-11 * rank[j]; };

  // Hungarian method on an n x m matrix with n <= m (rows fully assigned).
  const bool rows_are_obs = n_obs <= n_pred;
  const int n = rows_are_obs ? n_obs : n_pred;
  const int m = rows_are_obs ? n_pred : n_obs;
  auto a = [&](int row, int col) { return rows_are_obs ? cost(row, col) : cost(col, row); };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<char> pred_used(n_pred, 0);
  for (int j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    const int obs = rows_are_obs ? p[j] - 1 : j - 1;
    const int pred = rows_are_obs ? j - 1 : p[j] - 1;
    out.observed_to_predicted[obs] = pred;
    pred_used[pred] = 1;
    out.total_cost += std::abs(observed[obs] - predicted[pred]);
  }
  for (int i = 0; i < n_obs; ++i)
    if (out.observed_to_predicted[i] < 0) out.unmatched_observed.push_back(i);
  for (int j = 0; j < n_pred; ++j)
    if (!pred_used[j]) out.unmatched_predicted.push_back(j);
  return out;
}

double fit_cost(const ResonanceDataset& data, const HyperfineTensor& tensor, const FitOptions& options) {
  return FitModel(data, options, tensor).cost(tensor);
}

std::vector<HyperfineTensor> zero_field_candidates(double f1, double f2, double f3) {
  const double e0 = -(f1 + f2 + f3) / 4.0;
  std::array<double, 4> levels{e0, e0 + f1, e0 + f2, e0 + f3};
  // sign triples with s_x s_y s_z = -1
  constexpr std::array<std::array<int, 3>, 4> triples{{{1, -1, 1}, {-1, 1, 1}, {1, 1, -1}, {-1, -1, -1}}};
  std::array<int, 4> perm{0, 1, 2, 3};
  std::vector<HyperfineTensor> out;
  do {
    Vec3 a = Vec3::Zero();
    for (int t = 0; t < 4; ++t)
      for (int i = 0; i < 3; ++i) a[i] += triples[t][i] * levels[perm[t]];
    out.push_back({a, Vec3(135.0, 90.0, -45.0)});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

namespace {

std::vector<std::pair<double, HyperfineTensor>> ranked_starts(const ResonanceDataset& data,
                                                              const FitOptions& options) {
  std::vector<double> zf;
  for (const auto& r : data.records)
    if (r.field_t.norm() == 0.0) zf.push_back(r.freq_mhz);
  std::sort(zf.begin(), zf.end(), std::greater<>());
  std::vector<double> distinct;
  for (double f : zf)
    if (distinct.empty() || distinct.back() - f > 1e-6) distinct.push_back(f);
  if (distinct.size() < 3) {
    throw Error("default initialization needs three distinct zero-field lines; supply an initial tensor");
  }
  std::vector<std::pair<double, HyperfineTensor>> starts;
  for (auto t : zero_field_candidates(distinct[2], distinct[1], distinct[0])) {
    for (int k = 0; k < 12; ++k) {
      t.euler_deg.z() = -90.0 + 7.5 * k;
      starts.emplace_back(fit_cost(data, t, options), t);
    }
  }
  std::stable_sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return starts;
}

}  // namespace

HyperfineTensor default_initialization(const ResonanceDataset& data, const FitOptions& options) {
  return ranked_starts(data, options).front().second;
}

namespace {

struct LmOutcome {
  Eigen::VectorXd p;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

LmOutcome levenberg_marquardt(const FitModel& model, Eigen::VectorXd p, const FitOptions& o) {
  auto refs = model.assign(model.tensor(p));
  Eigen::VectorXd r = model.residuals(model.tensor(p), refs);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  LmOutcome out;
  for (int it = 0; it < o.max_iterations; ++it) {
    out.iterations = it + 1;
    if (cost < 1e-30) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd j = model.jacobian(p, refs);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;
    const double diag_floor = 1e-12 * std::max(jtj.diagonal().maxCoeff(), 1e-300);
    bool accepted = false;
    double previous = cost;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = jtj;
      for (Eigen::Index k = 0; k < damped.rows(); ++k) damped(k, k) += lambda * std::max(jtj(k, k), diag_floor);
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      const Eigen::VectorXd trial = p + step;
      const auto trial_refs = model.assign(model.tensor(trial));
      const Eigen::VectorXd trial_r = model.residuals(model.tensor(trial), trial_refs);
      const double trial_cost = trial_r.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        p = trial;
        refs = trial_refs;
        r = trial_r;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || previous - cost <= o.relative_tolerance * previous) {
      out.converged = true;
      break;
    }
  }
  out.p = p;
  out.cost = cost;
  return out;
}

HyperfineTensor shifted_gamma(const HyperfineTensor& t, double delta_deg) {
  HyperfineTensor s = t;
  s.euler_deg.z() += delta_deg;
  return s;
}

DegenerateSolution degenerate_partner(const ResonanceDataset& data, const HyperfineTensor& fit,
                                      const FitOptions& options) {
  DegenerateSolution out;
  out.tensor = shifted_gamma(fit, -90.0);
  const auto& set = orientation_set();
  const CrystalTensor a = CrystalTensor::from(fit);
  const CrystalTensor b = CrystalTensor::from(out.tensor);
  const double scale = std::max(fit.principal_mhz.cwiseAbs().maxCoeff(), 1e-12);
  std::map<std::string, std::string> relabel;
  for (const auto& id : set) {
    const Mat3 target = tensor_for_orientation(a, id).mhz();
    for (const auto& other : set) {
      if ((tensor_for_orientation(b, other).mhz() - target).cwiseAbs().maxCoeff() < 1e-9 * scale) {
        relabel[id.label] = other.label;
        out.relabel.emplace_back(id.label, other.label);
        break;
      }
    }
  }
  ResonanceDataset mapped = data;
  for (auto& r : mapped.records) {
    if (!r.subset) continue;
    const auto it = relabel.find(*r.subset);
    if (it != relabel.end()) r.subset = it->second;
  }
  out.chi2 = fit_cost(mapped, out.tensor, options);
  return out;
}

}  // namespace

Eigen::MatrixXd fit_uncertainties(const ResonanceDataset& data, const FitResult& result,
                                  const FitOptions& options) {
  const FitModel model(data, options, result.tensor);
  const Eigen::VectorXd p = model.params(result.tensor);
  const auto refs = model.assign(result.tensor);
  const Eigen::MatrixXd j = model.jacobian(p, refs);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  std::vector<std::string> weak;
  const auto names = model.names();
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > options.rank_tolerance * smax && smax > 0.0) continue;
    const Eigen::VectorXd v = svd.matrixV().col(k);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (std::abs(v[i]) > 0.3 && std::find(weak.begin(), weak.end(), names[i]) == weak.end()) weak.push_back(names[i]);
  }
  if (!weak.empty() || smax == 0.0) {
    std::string list;
    for (const auto& w : weak) list += (list.empty() ? "" : ", ") + w;
    throw UnderdeterminedFitError("fit is underdetermined; unconstrained parameters: " + list, weak, result);
  }
  const Eigen::VectorXd inv_s2 = s.cwiseAbs2().cwiseInverse();
  Eigen::MatrixXd cov = svd.matrixV() * inv_s2.asDiagonal() * svd.matrixV().transpose();
  if (options.scale_by_reduced_chi2) cov *= result.reduced_chi2;
  return 0.5 * (cov + cov.transpose());
}

FitResult fit_tensor(const ResonanceDataset& data, std::optional<HyperfineTensor> init, const FitOptions& options) {
  data.validate();
  std::vector<HyperfineTensor> starts;
  if (init) {
    starts.push_back(*init);
  } else {
    const auto ranked = ranked_starts(data, options);
    for (std::size_t k = 0; k < ranked.size() && starts.size() < 3; ++k) starts.push_back(ranked[k].second);
  }

  FitResult best;
  double best_cost = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (const auto& start : starts) {
    const FitModel model(data, options, start);
    const LmOutcome lm = levenberg_marquardt(model, model.params(start), options);
    if (lm.cost < best_cost) {
      best_cost = lm.cost;
      best.tensor = model.tensor(lm.p);
      best.parameters = lm.p;
      best.parameter_names = model.names();
      best.iterations = lm.iterations;
      converged = lm.converged;
    }
  }

  const FitModel model(data, options, best.tensor);
  const auto refs = model.assign(best.tensor);
  const Eigen::VectorXd r = model.residuals(best.tensor, refs);
  best.chi2 = r.squaredNorm();
  best.converged = converged;
  double sq = 0.0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].orientation < 0) {
      best.unmatched_records.push_back(static_cast<int>(i));
      continue;
    }
    ++best.n_residuals;
    const double d = r[static_cast<Eigen::Index>(i)] * data.records[i].sigma_mhz;
    sq += d * d;
  }
  best.rms_mhz = best.n_residuals ? std::sqrt(sq / best.n_residuals) : 0.0;
  best.dof = best.n_residuals - model.n_params();
  best.reduced_chi2 = best.dof > 0 ? best.chi2 / best.dof : 0.0;
  if (options.fit_euler) {
    best.warnings.push_back(
        "all three Euler angles free: cubic symmetry makes several Euler triples describe the same tensor set");
  }
  if (!best.unmatched_records.empty()) {
    best.warnings.push_back(std::to_string(best.unmatched_records.size()) + " observations had no predicted line");
  }

  best.covariance = fit_uncertainties(data, best, options);
  best.uncertainties = best.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  best.principal_sigma_mhz = best.uncertainties.head<3>();
  if (options.fit_euler) best.euler_sigma_deg = best.uncertainties.tail<3>();
  else best.euler_sigma_deg = Vec3(0.0, 0.0, best.uncertainties[3]);

  best.degenerate.push_back(degenerate_partner(data, best.tensor, options));

  if (!converged) {
    throw FitConvergenceError("no convergence after " + std::to_string(options.max_iterations) + " iterations", best);
  }
  return best;
}

std::vector<MagneticField> odmr_field_grid() {
  std::vector<MagneticField> out{MagneticField(Vec3::Zero())};
  const std::array<Vec3, 3> axes{Vec3(0, 0, 1), Vec3(1, 1, 0), Vec3(1, 1, 1)};
  for (const auto& axis : axes)
    for (double b_mt : {0.5, 1.0, 1.5, 2.0}) out.push_back(MagneticField::along(axis, b_mt * 1e-3));
  return out;
}

ResonanceDataset synthesize_dataset(const HyperfineTensor& tensor, const std::vector<MagneticField>& fields,
                                    double noise_mhz, double sigma_mhz, std::uint64_t seed, bool with_subsets,
                                    bool with_pairs, const PhysicalConstants& c) {
  if (!(sigma_mhz > 0.0)) throw Error("synthetic uncertainties must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const CrystalTensor z0 = CrystalTensor::from(tensor);
  const auto& set = orientation_set();
  std::vector<CrystalTensor> tensors;
  for (const auto& id : set) tensors.push_back(tensor_for_orientation(z0, id));
  ResonanceDataset out;
  for (const auto& b : fields) {
    const auto classes = partition_tensors(tensors, b, 1e-3, c);
    for (const auto& cls : classes) {
      const int rep = cls.front();
      for (const auto& line : transition_frequencies(b, tensors[rep], c).lines) {
        ResonanceRecord r;
        r.field_t = b.tesla();
        r.freq_mhz = line.freq_mhz + (noise_mhz > 0.0 ? noise_mhz * noise(rng) : 0.0);
        r.sigma_mhz = sigma_mhz;
        if (with_subsets) r.subset = set[rep].label;
        if (with_pairs) r.pair = std::make_pair(line.lower, line.upper);
        out.records.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::vector<Peak> extract_peaks(const SpectrumProfile& profile, double min_relative_height) {
  const auto& x = profile.freq_mhz;
  const auto& y = profile.amplitude;
  std::vector<Peak> peaks;
  if (x.size() < 3) return peaks;
  const double top = *std::max_element(y.begin(), y.end());
  if (!(top > 0.0)) return peaks;
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= min_relative_height * top) maxima.push_back(i);

  for (std::size_t m = 0; m < maxima.size(); ++m) {
    const std::size_t i = maxima[m];
    Peak pk;
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    const double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
    const double dx = x[i + 1] - x[i];
    pk.freq_mhz = x[i] + shift * dx;
    pk.height = y1 - 0.25 * (y0 - y2) * shift;
    const double half = 0.5 * pk.height;
    const std::size_t left_stop = m > 0 ? maxima[m - 1] : 0;
    const std::size_t right_stop = m + 1 < maxima.size() ? maxima[m + 1] : y.size() - 1;
    std::optional<double> left, right;
    for (std::size_t k = i; k > left_stop; --k) {
      if (y[k - 1] < half) {
        left = x[k - 1] + (half - y[k - 1]) / (y[k] - y[k - 1]) * (x[k] - x[k - 1]);
        break;
      }
    }
    for (std::size_t k = i; k < right_stop; ++k) {
      if (y[k + 1] < half) {
        right = x[k] + (y[k] - half) / (y[k] - y[k + 1]) * (x[k + 1] - x[k]);
        break;
      }
    }
    if (left && right) {
      pk.fwhm_mhz = *right - *left;
      pk.resolved = pk.fwhm_mhz <= 1.15 * profile.linewidth_mhz;
    } else {
      pk.fwhm_mhz = std::numeric_limits<double>::quiet_NaN();
      pk.resolved = false;
    }
    peaks.push_back(pk);
  }
  return peaks;
}

}  // namespace tcentre
