// Copyright 2026 The sdelab Authors
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
#include <string_view>
#include <vector>

namespace sdelab::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kSuccess = 0, kDomainFailure = 1, kUsageError = 2 };

/// Runs `sdelab <validate|simulate|converge|signchange|transform-check>
/// --config <path> [--seed <u64>]`. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Real number with `precision` significant digits ("%.*g").
std::string format_real(double value, int precision = 17);

/// RFC 4180 field: quoted when it holds a comma, quote, CR or LF.
std::string csv_field(std::string_view field);

}  // namespace sdelab::cli
