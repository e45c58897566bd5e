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

// Text formats shared by the command-line tools and the Python module.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcentre/decoherence.hpp"
#include "tcentre/tensor_fit.hpp"

namespace tcentre {

/// Shortest decimal text that reads back to the same double; "inf"/"-inf"/"nan"
/// for non-finite values.
std::string format_double(double v);

struct FieldLines {
  Vec3 field_t = Vec3::Zero();
  TransitionList lines;
};

/// freq_MHz,lower,upper,orientation; with `with_field` the rows are prefixed by
/// Bx_T,By_T,Bz_T.
std::string transitions_csv(const std::vector<FieldLines>& rows, bool with_field);

/// theta_deg,phi_deg,value in grid order.
std::string map_csv(const DirectionMap& map);

/// theta_deg,phi_deg per point; curves separated by a blank line.
std::string contour_csv(const DpmContour& contour);

/// gnuplot script plotting a map or contour CSV.
std::string gnuplot_script(const std::string& data_file, const std::string& title, bool is_map);

nlohmann::json to_json(const HyperfineTensor& t);
HyperfineTensor tensor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FitResult& r);
nlohmann::json to_json(const OrientationId& id);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string library_version();

}  // namespace tcentre
