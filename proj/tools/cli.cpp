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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

namespace tcentre::cli {

namespace {

using nlohmann::json;

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::optional<double> to_number(const std::string& s) {
  const std::string t = strip(s);
  if (t.empty()) return std::nullopt;
  const char* first = t.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto res = std::from_chars(first, t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(strip(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

const std::vector<std::pair<std::string, double>> kFieldUnits{{"mT", 1e-3}, {"uT", 1e-6}, {"T", 1.0}};
const std::vector<std::pair<std::string, double>> kTimeUnits{
    {"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"ps", 1e-12}, {"s", 1.0}};
const std::vector<std::pair<std::string, double>> kFrequencyUnits{
    {"MHz", 1.0}, {"kHz", 1e-3}, {"GHz", 1e3}, {"Hz", 1e-6}};
const std::vector<std::pair<std::string, double>> kAngleUnits{{"deg", 1.0}, {"rad", 180.0 / std::numbers::pi}};

struct Provenance {
  std::string command;
  std::vector<std::string> args;
  json config = json::object();
};

void emit(const std::string& path, const std::string& content, const Provenance& prov, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  atomic_write(path, content);
  json envelope;
  envelope["tool"] = "tcentre";
  envelope["version"] = library_version();
  envelope["command"] = prov.command;
  envelope["argv"] = prov.args;
  envelope["config"] = prov.config;
  envelope["output"] = std::filesystem::path(path).filename().string();
  atomic_write(path + ".provenance.json", envelope.dump(2) + "\n");
}

json constants_json(const PhysicalConstants& c) {
  return {{"g_e", c.g_e}, {"g_n", c.g_n}, {"mu_B", c.mu_B}, {"mu_N", c.mu_N}, {"hbar", c.hbar}};
}

json field_json(const MagneticField& b) { return {b.tesla().x(), b.tesla().y(), b.tesla().z()}; }

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

struct Options {
  // shared
  std::string tensor = "paper";
  std::string out;
  double g_e = PhysicalConstants{}.g_e;
  double g_n = PhysicalConstants{}.g_n;
  // predict
  std::string field;
  std::string orientations = "subsets";
  std::string band = "all";
  // fit
  std::string data;
  std::string init;
  bool fit_euler = false;
  bool absolute_sigma = false;
  // map / dpm
  std::string metric;
  std::string tau = "10ns";
  std::string time = "100ns";
  std::string resolution = "91x180";
  std::string theta_range = "0deg:180deg";
  std::string phi_range = "0deg:360deg";
  std::string gnuplot;
  unsigned threads = 0;
  int contour_points = 180;
  // synth
  std::string fields = "odmr";
  std::string noise;
  std::string sigma;
  std::uint64_t seed = 0;
  bool no_subsets = false;
  bool pairs = false;
};

PhysicalConstants constants_from(const Options& o) {
  PhysicalConstants c;
  c.g_e = o.g_e;
  c.g_n = o.g_n;
  return c;
}

int cmd_predict(const Options& o, Provenance& prov, std::ostream& out) {
  const auto c = constants_from(o);
  const HyperfineTensor t = parse_tensor_spec(o.tensor, "--tensor");
  const auto fields = parse_field_spec(o.field, "--B");
  if (o.band != "all" && o.band != "nmr" && o.band != "epr") throw UsageError("--band: expected all, nmr or epr");
  const CrystalTensor z0 = CrystalTensor::from(t);
  const auto& set = orientation_set();
  std::vector<CrystalTensor> tensors;
  for (const auto& id : set) tensors.push_back(tensor_for_orientation(z0, id));

  std::vector<int> chosen;
  const bool per_subset = o.orientations == "subsets";
  if (o.orientations == "all") {
    for (int k = 0; k < static_cast<int>(set.size()); ++k) chosen.push_back(k);
  } else if (!per_subset) {
    const auto idx = orientation_index(o.orientations);
    if (!idx) throw UsageError("--orientations: expected subsets, all or a label z0..z11");
    chosen.push_back(*idx);
  }

  std::vector<FieldLines> rows;
  for (const auto& b : fields) {
    std::vector<int> members = chosen;
    if (per_subset) {
      members.clear();
      for (const auto& cls : partition_tensors(tensors, b, 1e-3, c)) members.push_back(cls.front());
    }
    for (int k : members) {
      TransitionList lines = transition_frequencies(b, tensors[k], c, set[k].label);
      if (o.band != "all") {
        const auto bands = split_bands(lines);
        lines = o.band == "nmr" ? bands.first : bands.second;
      }
      rows.push_back({b.tesla(), std::move(lines)});
    }
  }
  prov.config = {{"tensor", to_json(t)},
                 {"fields_t", json::array()},
                 {"orientations", o.orientations},
                 {"band", o.band},
                 {"constants", constants_json(c)}};
  for (const auto& b : fields) prov.config["fields_t"].push_back(field_json(b));
  emit(o.out, transitions_csv(rows, fields.size() > 1), prov, out);
  return kSuccess;
}

void print_fit_summary(const FitResult& r, std::ostream& out) {
  out << "converged: " << (r.converged ? "yes" : "no") << " after " << r.iterations << " iterations\n";
  const char* axes[] = {"A_X", "A_Y", "A_Z"};
  for (int i = 0; i < 3; ++i)
    out << "  " << axes[i] << " = " << fixed(r.tensor.principal_mhz[i], 6) << " +/- "
        << fixed(r.principal_sigma_mhz[i] * 1e3, 3) << " kHz\n";
  out << "  euler (deg) = " << fixed(r.tensor.euler_deg.x(), 4) << ", " << fixed(r.tensor.euler_deg.y(), 4) << ", "
      << fixed(r.tensor.euler_deg.z(), 4) << "  (gamma +/- " << fixed(r.euler_sigma_deg.z(), 4) << ")\n";
  out << "  chi2 = " << format_double(r.chi2) << ", reduced chi2 = " << format_double(r.reduced_chi2)
      << ", rms = " << fixed(r.rms_mhz * 1e3, 3) << " kHz over " << r.n_residuals << " lines\n";
  for (const auto& d : r.degenerate)
    out << "  equivalent solution: gamma = " << fixed(d.tensor.euler_deg.z(), 4) << " deg, chi2 = "
        << format_double(d.chi2) << "\n";
  if (!r.degenerate.empty()) {
    out << "  line positions cannot separate these solutions; pick the one whose positive-value\n"
           "  hyperfine axis X points from the bound electron site towards the hydrogen nucleus\n";
  }
  for (const auto& w : r.warnings) out << "  warning: " << w << "\n";
}

int cmd_fit(const Options& o, Provenance& prov, std::ostream& out) {
  std::ifstream in(o.data);
  if (!in) throw UsageError("--data: cannot open " + o.data);
  const ResonanceDataset data = ResonanceDataset::read_csv(in);
  FitOptions fo;
  fo.fit_euler = o.fit_euler;
  fo.scale_by_reduced_chi2 = !o.absolute_sigma;
  fo.constants = constants_from(o);
  std::optional<HyperfineTensor> init;
  if (!o.init.empty()) init = parse_tensor_spec(o.init, "--init");
  prov.config = {{"data", o.data},
                 {"init", o.init.empty() ? json("zero-field") : to_json(*init)},
                 {"fit_euler", o.fit_euler},
                 {"absolute_sigma", o.absolute_sigma},
                 {"constants", constants_json(fo.constants)}};
  const FitResult r = fit_tensor(data, init, fo);
  print_fit_summary(r, out);
  emit(o.out, to_json(r).dump(2) + "\n", prov, out);
  return kSuccess;
}

std::pair<int, int> parse_resolution(const std::string& s) {
  const auto x = s.find('x');
  const auto a = x == std::string::npos ? std::nullopt : to_number(s.substr(0, x));
  const auto b = x == std::string::npos ? std::nullopt : to_number(s.substr(x + 1));
  if (!a || !b || *a < 2 || *b < 2 || *a != std::floor(*a) || *b != std::floor(*b)) {
    throw UsageError("--resolution: expected <n_theta>x<n_phi>, both integers >= 2");
  }
  return {static_cast<int>(*a), static_cast<int>(*b)};
}

std::pair<double, double> parse_range(const std::string& s, const std::string& flag) {
  const auto parts = split(s, ':');
  if (parts.size() != 2) throw UsageError(flag + ": expected <lo>deg:<hi>deg");
  return {parse_angle(parts[0], flag), parse_angle(parts[1], flag)};
}

int cmd_map(const Options& o, Provenance& prov, std::ostream& out) {
  const auto c = constants_from(o);
  const auto metric = parse_map_metric(o.metric);
  if (!metric) throw UsageError("--metric: expected cyclicity, delta_h, delta_e or corrected-fidelity");
  const HyperfineTensor t = parse_tensor_spec(o.tensor, "--tensor");
  MapRequest r;
  r.metric = *metric;
  r.b_magnitude_t = parse_field_magnitude(o.field, "--B");
  r.tau_s = parse_time(o.tau, "--tau");
  r.t_s = parse_time(o.time, "--t");
  std::tie(r.n_theta, r.n_phi) = parse_resolution(o.resolution);
  const auto th = parse_range(o.theta_range, "--theta-range");
  const auto ph = parse_range(o.phi_range, "--phi-range");
  r.window = {deg_to_rad(th.first), deg_to_rad(th.second), deg_to_rad(ph.first), deg_to_rad(ph.second)};
  r.threads = o.threads;
  const DirectionMap map = map_over_directions(CrystalTensor::from(t), r, c);
  prov.config = {{"metric", to_string(r.metric)},
                 {"tensor", to_json(t)},
                 {"B_T", r.b_magnitude_t},
                 {"tau_s", r.tau_s},
                 {"t_s", r.t_s},
                 {"n_theta", r.n_theta},
                 {"n_phi", r.n_phi},
                 {"theta_range_deg", {th.first, th.second}},
                 {"phi_range_deg", {ph.first, ph.second}},
                 {"constants", constants_json(c)}};
  emit(o.out, map_csv(map), prov, out);
  if (!o.gnuplot.empty()) {
    const std::string data = o.out.empty() ? "map.csv" : std::filesystem::path(o.out).filename().string();
    atomic_write(o.gnuplot, gnuplot_script(data, to_string(r.metric), true));
  }
  return kSuccess;
}

int cmd_dpm(const Options& o, Provenance& prov, std::ostream& out) {
  const auto c = constants_from(o);
  const HyperfineTensor t = parse_tensor_spec(o.tensor, "--tensor");
  const double b = parse_field_magnitude(o.field, "--B");
  if (o.contour_points < 3) throw UsageError("--points: need at least 3");
  const DpmContour contour = dpm_contour(CrystalTensor::from(t), b, o.contour_points, Branch::Up, c);
  prov.config = {{"tensor", to_json(t)}, {"B_T", b}, {"points", o.contour_points}, {"constants", constants_json(c)}};
  if (!contour.exists) {
    (o.out.empty() ? std::cerr : out) << "no dephasing-protection manifold: delta_h keeps one sign\n";
  } else if (!o.out.empty()) {
    out << "manifold around axis (" << fixed(contour.axis.x(), 6) << ", " << fixed(contour.axis.y(), 6) << ", "
        << fixed(contour.axis.z(), 6) << "), max delta_e = " << fixed(contour.max_delta_e_mhz * 1e3, 3) << " kHz\n";
  }
  emit(o.out, contour_csv(contour), prov, out);
  if (!o.gnuplot.empty()) {
    const std::string data = o.out.empty() ? "dpm.csv" : std::filesystem::path(o.out).filename().string();
    atomic_write(o.gnuplot, gnuplot_script(data, "delta_h = 0", false));
  }
  return kSuccess;
}

int cmd_synth(const Options& o, Provenance& prov, std::ostream& out) {
  const auto c = constants_from(o);
  const HyperfineTensor t = parse_tensor_spec(o.tensor, "--tensor");
  const double noise = parse_frequency(o.noise, "--noise");
  if (noise < 0.0) throw UsageError("--noise: must be >= 0");
  double sigma = noise;
  if (!o.sigma.empty()) sigma = parse_frequency(o.sigma, "--sigma");
  if (!(sigma > 0.0)) throw UsageError("--sigma: required (and > 0) when --noise is zero");
  std::vector<MagneticField> fields;
  if (o.fields == "odmr") {
    fields = odmr_field_grid();
  } else {
    for (const auto& spec : split(o.fields, ';'))
      for (const auto& b : parse_field_spec(spec, "--fields")) fields.push_back(b);
  }
  const ResonanceDataset d = synthesize_dataset(t, fields, noise, sigma, o.seed, !o.no_subsets, o.pairs, c);
  std::ostringstream csv;
  d.write_csv(csv);
  prov.config = {{"tensor", to_json(t)},       {"fields", o.fields},   {"noise_mhz", noise},
                 {"sigma_mhz", sigma},         {"seed", o.seed},       {"subsets", !o.no_subsets},
                 {"pairs", o.pairs},           {"constants", constants_json(c)}};
  emit(o.out, csv.str(), prov, out);
  return kSuccess;
}

}  // namespace

double parse_quantity(const std::string& text, const std::vector<std::pair<std::string, double>>& units,
                      const std::string& flag) {
  const std::string s = strip(text);
  for (const auto& [unit, scale] : units) {
    if (s.size() <= unit.size() || s.compare(s.size() - unit.size(), unit.size(), unit) != 0) continue;
    if (const auto v = to_number(s.substr(0, s.size() - unit.size()))) return *v * scale;
  }
  std::string names;
  for (const auto& u : units) names += (names.empty() ? "" : ", ") + u.first;
  throw UsageError(flag + ": '" + text + "' needs a number with a unit (" + names + ")");
}

double parse_field_magnitude(const std::string& text, const std::string& flag) {
  if (strip(text) == "0") return 0.0;
  const double v = parse_quantity(text, kFieldUnits, flag);
  if (v < 0.0) throw UsageError(flag + ": field magnitude must be >= 0");
  return v;
}

double parse_time(const std::string& text, const std::string& flag) {
  const double v = parse_quantity(text, kTimeUnits, flag);
  if (v < 0.0) throw UsageError(flag + ": time must be >= 0");
  return v;
}

double parse_frequency(const std::string& text, const std::string& flag) {
  return parse_quantity(text, kFrequencyUnits, flag);
}

double parse_angle(const std::string& text, const std::string& flag) { return parse_quantity(text, kAngleUnits, flag); }

Vec3 parse_direction(const std::string& text, const std::string& flag) {
  const std::string s = strip(text);
  Vec3 d;
  if (s.find(',') != std::string::npos) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) throw UsageError(flag + ": direction needs three components");
    for (int i = 0; i < 3; ++i) {
      const auto v = to_number(parts[i]);
      if (!v) throw UsageError(flag + ": bad direction component '" + parts[i] + "'");
      d[i] = *v;
    }
  } else {
    int k = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      int sign = 1;
      if (s[i] == '-') {
        sign = -1;
        ++i;
      }
      if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])) || k == 3) {
        throw UsageError(flag + ": direction '" + text + "' is neither an index like 1-10 nor x,y,z");
      }
      d[k++] = sign * (s[i] - '0');
    }
    if (k != 3) throw UsageError(flag + ": direction '" + text + "' needs three indices");
  }
  if (d.norm() == 0.0) throw UsageError(flag + ": direction has zero length");
  return d.normalized();
}

std::vector<MagneticField> parse_field_spec(const std::string& text, const std::string& flag) {
  const std::string s = strip(text);
  if (s.empty()) throw UsageError(flag + ": field is required");
  if (s == "0") return {MagneticField(Vec3::Zero())};
  const auto at = s.find('@');
  const std::string mag = s.substr(0, at);
  const auto parts = split(mag, ':');
  if (parts.size() == 1) {
    const double b = parse_field_magnitude(parts[0], flag);
    if (b == 0.0) return {MagneticField(Vec3::Zero())};
    if (at == std::string::npos) throw UsageError(flag + ": nonzero field needs a direction, e.g. 1T@001");
    return {MagneticField(parse_direction(s.substr(at + 1), flag) * b)};
  }
  if (parts.size() != 3) throw UsageError(flag + ": sweep must read <start>:<stop>:<count>@<direction>");
  if (at == std::string::npos) throw UsageError(flag + ": sweep needs a direction, e.g. 0mT:2mT:11@110");
  const double b0 = parse_field_magnitude(parts[0], flag);
  const double b1 = parse_field_magnitude(parts[1], flag);
  const auto n = to_number(parts[2]);
  if (!n || *n < 2 || *n != std::floor(*n)) throw UsageError(flag + ": sweep count must be an integer >= 2");
  const Vec3 dir = parse_direction(s.substr(at + 1), flag);
  std::vector<MagneticField> out;
  const int count = static_cast<int>(*n);
  for (int i = 0; i < count; ++i) out.emplace_back(dir * (b0 + (b1 - b0) * i / (count - 1)));
  return out;
}

HyperfineTensor parse_tensor_spec(const std::string& text, const std::string& flag) {
  const std::string s = strip(text);
  if (s == "paper") return HyperfineTensor::paper();
  if (s == "dft") return HyperfineTensor::dft();
  if (s == "zero") return HyperfineTensor::isotropic(0.0);
  if (std::filesystem::is_regular_file(s)) {
    std::ifstream in(s);
    try {
      return tensor_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ParseError(flag + ": " + s + ": " + e.what());
    }
  }
  const auto halves = split(s, ';');
  if (halves.empty() || halves.size() > 2) throw UsageError(flag + ": expected paper, dft, zero, a file or values");
  const auto principal = split(halves[0], ',');
  if (principal.size() != 3) {
    throw UsageError(flag + ": '" + text + "' is not paper, dft, zero, an existing file, or AxMHz,AyMHz,AzMHz");
  }
  HyperfineTensor t;
  for (int i = 0; i < 3; ++i) t.principal_mhz[i] = parse_frequency(principal[i], flag);
  if (halves.size() == 2) {
    const auto euler = split(halves[1], ',');
    if (euler.size() != 3) throw UsageError(flag + ": Euler angles need three values");
    for (int i = 0; i < 3; ++i) t.euler_deg[i] = parse_angle(euler[i], flag);
  }
  return t;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"T centre hydrogen hyperfine spectra, tensor fits and nuclear-memory decoherence", "tcentre"};
  app.require_subcommand(1);
  Options o;
  auto add_shared = [&](CLI::App* sub) {
    sub->add_option("--out,-o", o.out, "output file (stdout when omitted)");
    sub->add_option("--g-e", o.g_e, "electron g factor");
    sub->add_option("--g-n", o.g_n, "hydrogen g factor");
  };

  auto* predict = app.add_subcommand("predict", "ground-state transition frequencies");
  add_shared(predict);
  predict->add_option("--tensor", o.tensor, "paper, dft, zero, JSON file or AxMHz,AyMHz,AzMHz[;a deg,b deg,g deg]");
  predict->add_option("--B", o.field, "0, 1T@001, 1T@x,y,z or 0mT:2mT:11@110")->required();
  predict->add_option("--orientations", o.orientations, "subsets (default), all, or a label z0..z11");
  predict->add_option("--band", o.band, "all, nmr (< 100 MHz) or epr");

  auto* fit = app.add_subcommand("fit", "fit the hyperfine tensor to a resonance dataset");
  add_shared(fit);
  fit->add_option("--data", o.data, "CSV dataset")->required();
  fit->add_option("--init", o.init, "initial tensor (default: from zero-field lines)");
  fit->add_flag("--fit-euler", o.fit_euler, "also fit alpha and beta");
  fit->add_flag("--absolute-sigma", o.absolute_sigma, "do not rescale the covariance by the reduced chi2");

  auto* map = app.add_subcommand("map", "metric over field directions at fixed |B|");
  add_shared(map);
  map->add_option("--metric", o.metric, "cyclicity, delta_h, delta_e or corrected-fidelity")->required();
  map->add_option("--tensor", o.tensor, "tensor spec");
  map->add_option("--B", o.field, "field magnitude, e.g. 1T")->required();
  map->add_option("--tau", o.tau, "excited-state lifetime, e.g. 10ns");
  map->add_option("--t", o.time, "evolution time, e.g. 100ns");
  map->add_option("--resolution", o.resolution, "<n_theta>x<n_phi>");
  map->add_option("--theta-range", o.theta_range, "e.g. 0deg:180deg");
  map->add_option("--phi-range", o.phi_range, "e.g. 0deg:360deg (end excluded)");
  map->add_option("--gnuplot", o.gnuplot, "also write a gnuplot script here");
  map->add_option("--threads", o.threads, "worker threads (0: all cores)");

  auto* dpm = app.add_subcommand("dpm", "trace the dephasing-protection manifold");
  add_shared(dpm);
  dpm->add_option("--tensor", o.tensor, "tensor spec");
  dpm->add_option("--B", o.field, "field magnitude, e.g. 1T")->required();
  dpm->add_option("--points", o.contour_points, "points per contour");
  dpm->add_option("--gnuplot", o.gnuplot, "also write a gnuplot script here");

  auto* synth = app.add_subcommand("synth", "synthetic resonance dataset");
  add_shared(synth);
  synth->add_option("--tensor", o.tensor, "tensor spec");
  synth->add_option("--fields", o.fields, "odmr (default grid) or field specs separated by ';'");
  synth->add_option("--noise", o.noise, "Gaussian noise on each line, e.g. 3kHz")->required();
  synth->add_option("--sigma", o.sigma, "quoted uncertainty (default: the noise level)");
  synth->add_option("--seed", o.seed, "random seed");
  synth->add_flag("--no-subsets", o.no_subsets, "omit the subset column");
  synth->add_flag("--pairs", o.pairs, "include the level pair column");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  Provenance prov;
  prov.args.assign(args.begin() + (args.empty() ? 0 : 1), args.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (predict->parsed()) {
      prov.command = "predict";
      return cmd_predict(o, prov, out);
    }
    if (fit->parsed()) {
      prov.command = "fit";
      return cmd_fit(o, prov, out);
    }
    if (map->parsed()) {
      prov.command = "map";
      return cmd_map(o, prov, out);
    }
    if (dpm->parsed()) {
      prov.command = "dpm";
      return cmd_dpm(o, prov, out);
    }
    if (synth->parsed()) {
      prov.command = "synth";
      return cmd_synth(o, prov, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const UnderdeterminedFitError& e) {
    err << "error: " << e.what() << "\n";
    return kUnderdetermined;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace tcentre::cli
