// Copyright 2026 The IoD-SAR Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IOD_SCENARIO_TOML_H_
#define IOD_SCENARIO_TOML_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace iod::scenario {

/// Reads the subset of TOML that scenario files use into a JSON tree:
/// comments, bare and dotted keys, [table] and [[array.of.tables]] headers,
/// basic strings, integers, floats, booleans, arrays (which may span lines)
/// and single-line inline tables. Integers stay integers.
///
/// Failures are InvalidArgument with a message of the form
/// "ParseError(line N): reason".
absl::StatusOr<nlohmann::json> ParseToml(std::string_view text);

/// Line number carried by a ParseToml error, or 0.
int ParseErrorLine(const absl::Status& status);

}  // namespace iod::scenario

#endif  // IOD_SCENARIO_TOML_H_
