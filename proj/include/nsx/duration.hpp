// Copyright 2026 The NSX Authors.
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

#include <chrono>
#include <string>
#include <string_view>

#include "nsx/error.hpp"

namespace nsx {

/// Parses "250ms", "900s", "5m", "20m", "2h", "90d"; a bare number is seconds.
inline std::chrono::duration<double> parse_duration(std::string_view text) {
  const std::string s(text);
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("bad duration: " + s);
  }
  const std::string unit = s.substr(used);
  double scale = 0;
  if (unit.empty() || unit == "s") scale = 1;
  else if (unit == "ms") scale = 1e-3;
  else if (unit == "m" || unit == "min") scale = 60;
  else if (unit == "h") scale = 3600;
  else if (unit == "d") scale = 86400;
  else throw InvalidArgument("bad duration unit in " + s);
  if (value < 0) throw InvalidArgument("negative duration: " + s);
  return std::chrono::duration<double>(value * scale);
}

}  // namespace nsx
