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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "histstate/marking.hpp"
#include "histstate/observables.hpp"

namespace histstate {

using Json = nlohmann::ordered_json;

inline constexpr int kScenarioVersion = 1;

struct NamedState {
  std::string name;
  HistoryState state;
};

struct ScenarioFamily {
  std::string name;
  std::vector<std::string> members;  // history state names
  std::string variant;               // "" when the family has a single form
  std::optional<std::vector<Complex>> expect_coefficients;
};

struct ScenarioOperator {
  std::string name;
  ProductHistoryOperator op;
};

struct ScenarioObservable {
  std::string name;
  std::string family;
  std::vector<double> values;
};

struct WeightCheck {
  std::string state;
  std::optional<double> expect;
  std::optional<CMatrix> expect_k;
};

struct InnerCheck {
  std::string left;
  std::string right;
  std::optional<Complex> expect;
};

struct EquivalenceCheck {
  std::string left;
  std::string right;
  bool expect = true;
};

struct DecomposeCheck {
  std::string state;
  std::string family;
  std::optional<std::vector<Complex>> expect;
};

struct ProbabilityCheck {
  std::string state;
  std::string family;
  std::optional<std::vector<double>> expect;
};

struct DistributionCheck {
  std::string state;
  std::string observable;
  std::optional<std::vector<std::pair<double, double>>> expect;
};

struct CompatibilityCheck {
  std::string from;  // fa
  std::string to;    // fb, expressed through fa
  std::optional<bool> expect;
  std::optional<CMatrix> expect_transform;
};

struct ReducedExpectation {
  std::size_t slot = 0;
  std::size_t subsystem = 0;
  CMatrix projector;  // expected normalized reduced factor
};

struct ConditionalCheck {
  std::string state;
  std::size_t slot = 0;
  std::size_t subsystem = 0;
  CMatrix projector;
  std::optional<ReducedExpectation> expect;
};

struct EigenhistoryCheck {
  std::string name;
  std::vector<std::string> operators;
  std::vector<std::string> expect_members;  // states, matched physically as a set
  std::vector<CKet> expect_vectors;         // matched up to global phase
};

struct BranchCheck {
  std::string family;
  bool expect_valid = true;
};

struct MeasureCheck {
  std::size_t register_index = 0;
  std::vector<CKet> basis;
  std::optional<std::vector<double>> expect;
  // Expected collapsed system vectors (unnormalized, as displayed for each
  // outcome), compared after projecting the ancilla onto that outcome.
  std::vector<CKet> expect_branches;
};

struct StageSpec {
  std::size_t register_index = 0;
  std::vector<CKet> basis;
  std::string family;
};

struct SequentialCheck {
  std::string name;
  std::vector<StageSpec> stages;
  std::optional<std::vector<double>> expect_stage1;
};

struct MarkingScenario {
  std::string name;
  AncillaLayout layout;
  CKet initial_system;
  std::vector<CKet> initial_registers;
  std::vector<MarkingStep> schedule;
  std::optional<CKet> expect_final;
  std::vector<BranchCheck> branch_maps;
  std::vector<MeasureCheck> measurements;
  std::vector<SequentialCheck> sequential;

  MarkedSystem system(const BridgingSet& bridging) const;
};

/// A fully resolved scenario: every name refers to something that exists
/// and every shape has been checked.
struct Scenario {
  std::string id;
  std::string title;
  std::map<std::string, Complex> parameters;
  Timeline timeline;
  std::vector<CMatrix> bridging_steps;
  std::vector<std::pair<std::string, CKet>> kets;
  std::vector<std::pair<std::string, CMatrix>> matrices;
  std::vector<NamedState> states;
  std::vector<ScenarioFamily> families;
  std::vector<ScenarioOperator> operators;
  std::vector<ScenarioObservable> observables;

  std::vector<WeightCheck> weight_checks;
  std::vector<InnerCheck> inner_checks;
  std::vector<EquivalenceCheck> equivalence_checks;
  std::vector<DecomposeCheck> decompose_checks;
  std::vector<ProbabilityCheck> probability_checks;
  std::vector<DistributionCheck> distribution_checks;
  std::vector<CompatibilityCheck> compatibility_checks;
  std::vector<ConditionalCheck> conditional_checks;
  std::vector<EigenhistoryCheck> eigenhistory_checks;
  std::vector<MarkingScenario> markings;

  BridgingSet bridging() const;
  const HistoryState& state(const std::string& name) const;
  const ScenarioFamily& family(const std::string& name) const;
  const ScenarioOperator& op(const std::string& name) const;
  const ScenarioObservable& observable(const std::string& name) const;
  Family build_family(const std::string& name) const;
};

/// Parses and resolves a scenario document. Errors are ParseError,
/// ResolutionError or ShapeError, each naming the JSON location.
Scenario parse_scenario(const Json& doc);
Scenario load_scenario(const std::filesystem::path& path);

/// Writes the resolved form: inline [re, im] numbers everywhere, no named
/// references except between top-level entities.
Json serialize_scenario(const Scenario& s);

// Encoders shared with the report writer. Numbers are [re, im] pairs;
// chains are written latest slot first.
Json to_json(Complex c);
Json to_json(const CKet& v);
Json to_json(const CMatrix& m);
Json to_json(const HistoryState& h);

/// Equality of the resolved forms within tol.
bool equivalent(const Scenario& a, const Scenario& b, double tol = 0.0);

}  // namespace histstate
