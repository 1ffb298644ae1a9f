// Copyright 2026 The histstate Authors
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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "histstate/scenario.hpp"

namespace histstate {

inline constexpr const char* kReportSchema = "histstate-report/1";

/// Command names accepted by run(), in report-all order.
const std::vector<std::string>& commands();
bool is_command(const std::string& name);

struct RunOptions {
  std::string command = "report-all";
  double tol = kDefaultTol;
  std::uint64_t seed = 7;
  Completeness completeness = Completeness::Exact;
  // When set, families tagged with a different variant (and every check
  // that touches them) are skipped. Untagged families always run.
  std::optional<std::string> variant;
};

struct CheckRecord {
  std::string name;  // "<command>:<label>"
  std::string kind;
  Json inputs;       // resolved inputs; only their digest is reported
  Json results;
  std::string headline;  // one-line summary for the text format
  bool pass = false;
  std::string error;  // module error, if the check threw
};

struct Report {
  std::string scenario;
  RunOptions options;
  std::vector<CheckRecord> checks;

  bool all_pass() const;
  int exit_code() const { return all_pass() ? 0 : 1; }
};

Report run(const Scenario& scenario, const RunOptions& options);

/// 64-bit FNV-1a over the compact serialization, as 16 hex digits.
std::string digest(const Json& j);

/// Report serializations. Numbers are snapped to a 1e-12 grid so output is
/// byte-stable across platforms and runs.
Json report_json(const Report& report);
std::string report_text(const Report& report);

/// Indented JSON that keeps arrays of scalars (and of [re, im] pairs) on
/// one line.
std::string dump_json(const Json& j);

}  // namespace histstate
