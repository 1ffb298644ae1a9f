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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "histstate/runner.hpp"

int main(int argc, char** argv) {
  using namespace histstate;
  CLI::App app{"Evaluate a history-state scenario and print a report."};
  std::string path;
  std::string command = "report-all";
  std::string format = "json";
  std::string completeness = "exact";
  std::string variant;
  double tol = kDefaultTol;
  std::uint64_t seed = 7;
  app.add_option("--scenario", path, "Scenario file (JSON)")->required();
  app.add_option("--cmd", command, "Command to run")
      ->check(CLI::IsMember(commands()))
      ->capture_default_str();
  app.add_option("--tol", tol, "Numerical tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();
  app.add_option("--seed", seed, "Seed for randomized eigensolver combinations")->capture_default_str();
  app.add_option("--completeness", completeness, "Completeness test")
      ->check(CLI::IsMember({"exact", "physical"}))
      ->capture_default_str();
  app.add_option("--variant", variant, "Only run families tagged with this variant (plus untagged ones)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Scenario scenario;
  try {
    scenario = load_scenario(path);
  } catch (const Error& e) {
    std::cerr << "histstate: " << e.what() << "\n";
    return 2;
  }

  RunOptions options;
  options.command = command;
  options.tol = tol;
  options.seed = seed;
  options.completeness = completeness == "exact" ? Completeness::Exact : Completeness::Physical;
  if (!variant.empty()) options.variant = variant;

  Report report;
  try {
    report = run(scenario, options);
  } catch (const Error& e) {
    std::cerr << "histstate: " << e.what() << "\n";
    return 2;
  }
  if (format == "json") {
    std::cout << dump_json(report_json(report));
  } else {
    std::cout << report_text(report);
  }
  return report.exit_code();
}
