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

#include <iosfwd>
#include <string>
#include <vector>

#include "tcentre/tcentre.hpp"

namespace tcentre::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kParse = 3,
  kNumerical = 4,
  kUnderdetermined = 5,
};

/// Invalid flag values: missing units, unknown names, malformed specs.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// "<number><unit>" with the unit drawn from `units` (name -> scale). Throws
/// UsageError naming `flag` when the unit is missing or unknown.
double parse_quantity(const std::string& text, const std::vector<std::pair<std::string, double>>& units,
                      const std::string& flag);

double parse_field_magnitude(const std::string& text, const std::string& flag);  // tesla
double parse_time(const std::string& text, const std::string& flag);             // seconds
double parse_frequency(const std::string& text, const std::string& flag);        // MHz
double parse_angle(const std::string& text, const std::string& flag);            // degrees

/// "001", "1-10", "111" or "x,y,z".
Vec3 parse_direction(const std::string& text, const std::string& flag);

/// "0", "<B>@<dir>" or a sweep "<B0>:<B1>:<n>@<dir>".
std::vector<MagneticField> parse_field_spec(const std::string& text, const std::string& flag);

/// "paper", "dft", "zero", a JSON file, or "AxMHz,AyMHz,AzMHz[;alpha deg,beta deg,gamma deg]".
HyperfineTensor parse_tensor_spec(const std::string& text, const std::string& flag);

/// Runs one invocation; argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tcentre::cli
