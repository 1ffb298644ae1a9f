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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "histstate/runner.hpp"
#include "histstate/scalar_expr.hpp"
#include "histstate/scenario.hpp"
#include "support.hpp"

using namespace histstate;
using namespace testsupport;

namespace {

std::string bundled(const std::string& name) {
  return std::string(HISTSTATE_SCENARIO_DIR) + "/" + name + ".json";
}

Json minimal() {
  return Json::parse(R"({
    "version": 1,
    "id": "mini",
    "timeline": [{"label": "t1", "dim": 2}, {"label": "t2", "dim": 2}],
    "bridging": "trivial",
    "kets": {"up": [1, 0]},
    "history_states": {"A": {"terms": [{"coeff": "1/2", "chain": ["[up]", "H"]}]}}
  })");
}

template <typename E>
std::string error_of(const Json& doc) {
  try {
    parse_scenario(doc);
  } catch (const E& e) {
    return e.what();
  }
  return "";
}

const CheckRecord& find(const Report& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  return r.checks.front();
}

}  // namespace

TEST_CASE("scalar_expressions") {
  const std::map<std::string, Complex> params = {{"a", 0.5}};
  CHECK(std::abs(eval_scalar("1/sqrt(2)", {}) - 1 / kRt2) < 1e-15);
  CHECK(std::abs(eval_scalar("-i/sqrt(3)", {}) + kJ / std::sqrt(3.0)) < 1e-15);
  CHECK(std::abs(eval_scalar("2*a^2 + conj(2*i)", params) - Complex(0.5, -2)) < 1e-15);
  CHECK(std::abs(eval_scalar("exp(i*pi)", {}) + 1.0) < 1e-15);
  CHECK(std::abs(eval_scalar("1.5e-1", {}) - 0.15) < 1e-15);
  CHECK_THROWS_AS(eval_scalar("2*", {}), ParseError);
  CHECK_THROWS_AS(eval_scalar("b", params), ParseError);
  CHECK_THROWS_AS(eval_scalar("(1", {}), ParseError);
}

TEST_CASE("minimal_scenario_resolves") {
  const Scenario s = parse_scenario(minimal());
  REQUIRE(s.states.size() == 1);
  const auto& t = s.state("A").terms()[0];
  CHECK(std::abs(t.coeff - 0.5) < 1e-15);
  // Written latest slot first: H at t1, [up] at t2.
  CHECK((t.factors[0] - mat2(1, 1, 1, -1) / kRt2).norm() < 1e-15);
  CHECK((t.factors[1] - proj(zp())).norm() < 1e-15);
}

TEST_CASE("load_errors_name_their_location") {
  Json doc = minimal();
  doc["kets"]["bad"] = Json::parse(R"({"dim": 2, "amplitudes": [1, 0, 0]})");
  const auto shape = error_of<ShapeError>(doc);
  CHECK(shape.find("/kets/bad") != std::string::npos);

  doc = minimal();
  doc["history_states"]["A"]["terms"][0]["chain"][1] = "Hh";
  const auto res = error_of<ResolutionError>(doc);
  CHECK(res.find("Hh") != std::string::npos);
  CHECK(res.find("/history_states/A/terms/0/chain/1") != std::string::npos);

  doc = minimal();
  doc["version"] = 7;
  CHECK(error_of<ParseError>(doc).find("/version") != std::string::npos);

  doc = minimal();
  doc["history_states"]["A"]["terms"][0]["coeff"] = "1/";
  CHECK(error_of<ParseError>(doc).find("coeff") != std::string::npos);

  doc = minimal();
  doc["history_states"]["A"]["terms"][0]["chain"] = Json::array({"[up]"});
  CHECK(!error_of<ShapeError>(doc).empty());

  doc = minimal();
  doc["families"] = Json::parse(R"({"F": {"members": ["B"]}})");
  CHECK(error_of<ResolutionError>(doc).find("/families/F/members/0") != std::string::npos);

  doc = minimal();
  doc["bridging"] = Json::array({Json::array({Json::array({2, 0}), Json::array({0, 1})})});
  CHECK(!error_of<ShapeError>(doc).empty());
}

TEST_CASE("load_from_disk") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), ParseError);
  const auto path = std::filesystem::temp_directory_path() / "histstate_malformed.json";
  std::ofstream(path) << "{ not json";
  CHECK_THROWS_AS(load_scenario(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("spin3_encodes_the_y_family") {
  const Scenario s = load_scenario(bundled("spin3"));
  const auto& f = s.family("Y");
  REQUIRE(f.members.size() == 4);
  // Y1 = sqrt2 [z+][x+][z+] + sqrt2 [z-][x-][z+], written t3 first.
  const auto& y1 = s.state("Y1").terms();
  REQUIRE(y1.size() == 2);
  CHECK(std::abs(y1[0].coeff - kRt2) < 1e-15);
  CHECK((y1[0].factors[0] - proj(zp())).norm() < 1e-15);
  CHECK((y1[0].factors[1] - proj(xp())).norm() < 1e-15);
  CHECK((y1[0].factors[2] - proj(zp())).norm() < 1e-15);
  CHECK((y1[1].factors[1] - proj(xm())).norm() < 1e-15);
  CHECK((y1[1].factors[2] - proj(zm())).norm() < 1e-15);
}

TEST_CASE("round_trip_of_bundled_scenarios") {
  for (const char* name : {"spin3", "twotime-observables", "mach-zehnder", "zfamily"}) {
    CAPTURE(name);
    const Scenario a = load_scenario(bundled(name));
    const Json written = serialize_scenario(a);
    const Scenario b = parse_scenario(Json::parse(written.dump()));
    CHECK(equivalent(a, b, 1e-15));
    CHECK(serialize_scenario(b).dump() == written.dump());
  }
  // A real change is noticed.
  Scenario a = load_scenario(bundled("spin3"));
  Scenario b = a;
  b.parameters["alpha"] = 0.7;
  CHECK_FALSE(equivalent(a, b, 1e-12));
}

TEST_CASE("run_validate_on_mach_zehnder") {
  const Scenario s = load_scenario(bundled("mach-zehnder"));
  RunOptions o;
  o.command = "validate";
  const Report r = run(s, o);
  const auto& printed = find(r, "validate:alphaPrinted");
  CHECK_FALSE(printed.pass);
  for (const auto& w : printed.results["weights"]) CHECK(std::abs(w.get<double>() - 2.0) <= 1e-10);
  CHECK(find(r, "validate:alpha").pass);
  CHECK(r.exit_code() == 1);
  o.variant = "corrected";
  CHECK(run(s, o).exit_code() == 0);
}

TEST_CASE("run_probabilities_on_spin3") {
  const Scenario s = load_scenario(bundled("spin3"));
  RunOptions o;
  o.command = "probabilities";
  const Report r = run(s, o);
  const auto& c = find(r, "probabilities:Psi@Y");
  CHECK(c.pass);
  const std::vector<double> expected = {0.5, 0.5, 0, 0};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(c.results["probabilities"][i].get<double>() - expected[i]) <= 1e-10);
  }
}

TEST_CASE("run_validate_on_zfamily") {
  const Scenario s = load_scenario(bundled("zfamily"));
  RunOptions o;
  o.command = "validate";
  const Report r = run(s, o);
  const auto& printed = find(r, "validate:ZPrinted");
  CHECK_FALSE(printed.pass);
  bool names_z15 = false;
  for (const auto& f : printed.results["failures"]) names_z15 = names_z15 || f.get<std::string>().find("Z15") != std::string::npos;
  CHECK(names_z15);
  const auto& corrected = find(r, "validate:Z");
  CHECK(corrected.pass);
  CHECK(corrected.results["nonzero_count"] == 16);
  CHECK(corrected.results["bound"] == 16);
}

TEST_CASE("module_errors_become_failed_records") {
  Scenario s = load_scenario(bundled("spin3"));
  // Decomposing over an invalid family.
  s.families.push_back({"Broken", {"Y1", "Y1"}, "", std::nullopt});
  s.decompose_checks.push_back({"Psi", "Broken", std::nullopt});
  RunOptions o;
  o.command = "decompose";
  const Report r = run(s, o);
  const auto& c = find(r, "decompose:Psi@Broken");
  CHECK_FALSE(c.pass);
  CHECK(c.error.find("FamilyNotValidated") != std::string::npos);
  o.command = "nonsense";
  CHECK_THROWS_AS(run(s, o), ParseError);
}

TEST_CASE("report_serialization_is_deterministic") {
  const Scenario s = load_scenario(bundled("mach-zehnder"));
  RunOptions o;
  const std::string a = dump_json(report_json(run(s, o)));
  const std::string b = dump_json(report_json(run(s, o)));
  CHECK(a == b);
  const Json parsed = Json::parse(a);
  CHECK(parsed["schema"] == kReportSchema);
  CHECK(parsed["summary"]["total"].get<std::size_t>() == parsed["checks"].size());
  CHECK(a.find("-0.0,") == std::string::npos);
  const std::string text = report_text(run(s, o));
  CHECK(text.find("PASS  validate:alpha ") != std::string::npos);
  CHECK(text.find("FAIL  validate:alphaPrinted") != std::string::npos);
}

TEST_CASE("digest_depends_on_content") {
  CHECK(digest(Json::parse("[1, 2]")) == digest(Json::parse("[1, 2]")));
  CHECK(digest(Json::parse("[1, 2]")) != digest(Json::parse("[2, 1]")));
  CHECK(digest(Json::parse("[1]")).size() == 16);
}
