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

#include "tcentre/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace tcentre {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string transitions_csv(const std::vector<FieldLines>& rows, bool with_field) {
  std::ostringstream out;
  if (with_field) out << "Bx_T,By_T,Bz_T,";
  out << "freq_MHz,lower,upper,orientation\n";
  for (const auto& row : rows) {
    for (const auto& l : row.lines.lines) {
      if (with_field) {
        out << format_double(row.field_t.x()) << ',' << format_double(row.field_t.y()) << ','
            << format_double(row.field_t.z()) << ',';
      }
      out << format_double(l.freq_mhz) << ',' << l.lower << ',' << l.upper << ',' << l.orientation << '\n';
    }
  }
  return out.str();
}

std::string map_csv(const DirectionMap& map) {
  std::ostringstream out;
  out << "theta_deg,phi_deg,value\n";
  for (std::size_t i = 0; i < map.theta.size(); ++i)
    for (std::size_t j = 0; j < map.phi.size(); ++j)
      out << format_double(rad_to_deg(map.theta[i])) << ',' << format_double(rad_to_deg(map.phi[j])) << ','
          << format_double(map.values[i * map.phi.size() + j]) << '\n';
  return out.str();
}

std::string contour_csv(const DpmContour& contour) {
  std::ostringstream out;
  out << "theta_deg,phi_deg\n";
  for (std::size_t k = 0; k < contour.curves.size(); ++k) {
    if (k > 0) out << '\n';
    for (const auto& [theta, phi] : contour.curves[k])
      out << format_double(rad_to_deg(theta)) << ',' << format_double(rad_to_deg(phi)) << '\n';
  }
  return out.str();
}

std::string gnuplot_script(const std::string& data_file, const std::string& title, bool is_map) {
  std::ostringstream out;
  out << "set datafile separator ','\n"
      << "set title '" << title << "'\n"
      << "set xlabel 'phi (deg)'\nset ylabel 'theta (deg)'\n"
      << "set yrange [180:0]\n";
  if (is_map) {
    out << "set view map\nset pm3d map\n"
        << "splot '" << data_file << "' every ::1 using 2:1:3 with pm3d notitle\n";
  } else {
    out << "plot '" << data_file << "' every ::1 using 2:1 with lines notitle\n";
  }
  return out.str();
}

nlohmann::json to_json(const HyperfineTensor& t) {
  return {{"principal_mhz", {t.principal_mhz.x(), t.principal_mhz.y(), t.principal_mhz.z()}},
          {"euler_deg", {t.euler_deg.x(), t.euler_deg.y(), t.euler_deg.z()}}};
}

HyperfineTensor tensor_from_json(const nlohmann::json& j) {
  HyperfineTensor t;
  try {
    const auto& p = j.at("principal_mhz");
    if (!p.is_array() || p.size() != 3) throw ParseError("principal_mhz must hold three numbers");
    for (int i = 0; i < 3; ++i) t.principal_mhz[i] = p.at(i).get<double>();
    if (j.contains("euler_deg")) {
      const auto& e = j.at("euler_deg");
      if (!e.is_array() || e.size() != 3) throw ParseError("euler_deg must hold three numbers");
      for (int i = 0; i < 3; ++i) t.euler_deg[i] = e.at(i).get<double>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("tensor JSON: ") + ex.what());
  }
  return t;
}

nlohmann::json to_json(const FitResult& r) {
  nlohmann::json j;
  j["tensor"] = to_json(r.tensor);
  j["parameter_names"] = r.parameter_names;
  j["parameters"] = std::vector<double>(r.parameters.data(), r.parameters.data() + r.parameters.size());
  j["uncertainties"] = std::vector<double>(r.uncertainties.data(), r.uncertainties.data() + r.uncertainties.size());
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < r.covariance.cols(); ++k) row.push_back(r.covariance(i, k));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  j["principal_sigma_mhz"] = {r.principal_sigma_mhz.x(), r.principal_sigma_mhz.y(), r.principal_sigma_mhz.z()};
  j["euler_sigma_deg"] = {r.euler_sigma_deg.x(), r.euler_sigma_deg.y(), r.euler_sigma_deg.z()};
  j["chi2"] = r.chi2;
  j["reduced_chi2"] = r.reduced_chi2;
  j["rms_mhz"] = r.rms_mhz;
  j["n_residuals"] = r.n_residuals;
  j["dof"] = r.dof;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  nlohmann::json deg = nlohmann::json::array();
  for (const auto& d : r.degenerate) {
    nlohmann::json relabel = nlohmann::json::object();
    for (const auto& [from, to] : d.relabel) relabel[from] = to;
    deg.push_back({{"tensor", to_json(d.tensor)}, {"chi2", d.chi2}, {"relabel", relabel}});
  }
  j["degenerate"] = deg;
  j["unmatched_records"] = r.unmatched_records;
  j["warnings"] = r.warnings;
  return j;
}

nlohmann::json to_json(const OrientationId& id) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({id.rotation(i, 0), id.rotation(i, 1), id.rotation(i, 2)});
  return {{"label", id.label}, {"rotation", rows}};
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

std::string library_version() { return "0.1.0"; }

}  // namespace tcentre
