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

#include "histstate/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace histstate {

namespace {

const std::vector<std::string> kCommands = {
    "validate",       "weight",           "inner",      "decompose",  "probabilities",
    "eigenhistories", "simulate-marking", "branch-map", "sequential", "report-all"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", std::abs(x) < 5e-13 ? 0.0 : x);
  return buf;
}

std::string fmt(Complex c) {
  if (std::abs(c.imag()) < 5e-13) return fmt(c.real());
  return "(" + fmt(c.real()) + (c.imag() < 0 ? "-" : "+") + fmt(std::abs(c.imag())) + "i)";
}

template <typename T>
std::string fmt_list(const std::vector<T>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
  return out + "]";
}

Json complex_list(const std::vector<Complex>& xs) {
  Json out = Json::array();
  for (auto x : xs) out.push_back(to_json(x));
  return out;
}

bool close_list(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

bool close_list(const std::vector<Complex>& a, const std::vector<Complex>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  return (a - b).cwiseAbs().maxCoeff();
}

// Modulus of the normalized overlap, i.e. equality up to a global phase.
double overlap(const CKet& a, const CKet& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0 || nb == 0 || a.size() != b.size()) return 0;
  return std::abs(a.dot(b)) / (na * nb);
}

class Runner {
 public:
  Runner(const Scenario& s, const RunOptions& o)
      : s_(s), o_(o), bridging_(s.bridging()) {}

  std::vector<CheckRecord> run();

 private:
  using Body = std::function<void(CheckRecord&)>;

  void check(const std::string& command, const std::string& label, const std::string& kind,
             Json inputs, const Body& body);
  bool in_scope(const std::string& family) const;
  const Family& validated(const std::string& name);
  Json family_inputs(const std::string& name) const;

  void do_validate();
  void do_weight();
  void do_inner();
  void do_decompose();
  void do_probabilities();
  void do_eigenhistories();
  void do_simulate();
  void do_branch_map();
  void do_sequential();

  const Scenario& s_;
  const RunOptions& o_;
  BridgingSet bridging_;
  std::map<std::string, Family> cache_;
  std::vector<CheckRecord> out_;
};

void Runner::check(const std::string& command, const std::string& label, const std::string& kind,
                   Json inputs, const Body& body) {
  CheckRecord r;
  r.name = command + ":" + label;
  r.kind = kind;
  r.inputs = std::move(inputs);
  r.results = Json::object();
  try {
    body(r);
  } catch (const Error& e) {
    r.pass = false;
    r.error = e.what();
    r.headline = r.error;
  }
  out_.push_back(std::move(r));
}

bool Runner::in_scope(const std::string& family) const {
  if (!o_.variant) return true;
  const auto& v = s_.family(family).variant;
  return v.empty() || v == *o_.variant;
}

const Family& Runner::validated(const std::string& name) {
  auto it = cache_.find(name);
  if (it == cache_.end()) {
    const Family f = s_.build_family(name);
    auto report = validate_family(f, bridging_, {o_.tol, o_.completeness});
    it = cache_.emplace(name, f.with_report(std::move(report))).first;
  }
  if (!it->second.validated()) {
    const auto& failures = it->second.report()->failures;
    throw FamilyNotValidated("family '" + name + "' failed validation" +
                             (failures.empty() ? std::string() : ": " + failures.front()));
  }
  return it->second;
}

Json Runner::family_inputs(const std::string& name) const {
  Json members = Json::array();
  for (const auto& m : s_.family(name).members) members.push_back(to_json(s_.state(m)));
  return members;
}

void Runner::do_validate() {
  const auto& tl = s_.timeline;
  for (const auto& sf : s_.families) {
    if (!in_scope(sf.name)) continue;
    Json inputs = {{"family", family_inputs(sf.name)},
                   {"completeness", o_.completeness == Completeness::Exact ? "exact" : "physical"}};
    check("validate", sf.name, "family", std::move(inputs), [&](CheckRecord& r) {
      const Family f = s_.build_family(sf.name);
      const FamilyReport rep = validate_family(f, bridging_, {o_.tol, o_.completeness});
      const std::size_t bound = tl.last_dim() * tl.first_dim();
      r.results["variant"] = sf.variant;
      r.results["members"] = sf.members;
      r.results["gram"] = to_json(rep.gram);
      r.results["weights"] = rep.weights;
      r.results["completeness_residual"] = rep.completeness_residual;
      r.results["coefficients"] = complex_list(rep.coefficients);
      r.results["nonzero_count"] = rep.nonzero_count;
      r.results["bound"] = bound;
      r.results["bound_saturated"] = rep.nonzero_count == bound;
      r.results["failures"] = rep.failures;
      bool ok = rep.passed && rep.nonzero_count <= bound;
      if (sf.expect_coefficients) {
        const bool match = close_list(rep.coefficients, *sf.expect_coefficients, o_.tol);
        r.results["coefficients_match"] = match;
        ok = ok && match;
      }
      r.pass = ok;
      r.headline = rep.passed ? "valid, " + std::to_string(rep.nonzero_count) + "/" +
                                    std::to_string(bound) + " nonzero, residual " +
                                    fmt(rep.completeness_residual)
                              : std::to_string(rep.failures.size()) + " failure(s): " +
                                    rep.failures.front();
    });
  }
  for (const auto& c : s_.compatibility_checks) {
    if (!in_scope(c.from) || !in_scope(c.to)) continue;
    Json inputs = {{"from", family_inputs(c.from)}, {"to", family_inputs(c.to)}};
    check("validate", c.from + "~" + c.to, "compatible", std::move(inputs), [&](CheckRecord& r) {
      const auto comp = compatible(validated(c.from), validated(c.to), bridging_, o_.tol);
      r.results["compatible"] = comp.compatible;
      r.results["transform"] = to_json(comp.transform);
      r.results["residuals"] = comp.residuals;
      bool ok = c.expect ? comp.compatible == *c.expect : comp.compatible;
      if (c.expect_transform) {
        const double d = max_abs_diff(comp.transform, *c.expect_transform);
        r.results["transform_deviation"] = d;
        ok = ok && d <= o_.tol;
      }
      r.pass = ok;
      r.headline = std::string(comp.compatible ? "compatible" : "not compatible");
    });
  }
}

void Runner::do_weight() {
  for (const auto& c : s_.weight_checks) {
    check("weight", c.state, "weight", {{"state", to_json(s_.state(c.state))}}, [&](CheckRecord& r) {
      const HistoryState& h = s_.state(c.state);
      const double w = weight(h, bridging_);
      const CMatrix k = k_of(h, bridging_);
      r.results["weight"] = w;
      r.results["k"] = to_json(k);
      bool ok = std::isfinite(w);
      if (c.expect) ok = ok && std::abs(w - *c.expect) <= o_.tol;
      if (c.expect_k) {
        const double d = max_abs_diff(k, *c.expect_k);
        r.results["k_deviation"] = d;
        ok = ok && d <= o_.tol;
      }
      r.pass = ok;
      r.headline = "weight " + fmt(w);
    });
  }
}

void Runner::do_inner() {
  for (const auto& c : s_.inner_checks) {
    Json inputs = {{"left", to_json(s_.state(c.left))}, {"right", to_json(s_.state(c.right))}};
    check("inner", c.left + "|" + c.right, "inner", std::move(inputs), [&](CheckRecord& r) {
      const Complex v = inner(s_.state(c.left), s_.state(c.right), bridging_);
      r.results["value"] = to_json(v);
      r.pass = !c.expect || std::abs(v - *c.expect) <= o_.tol;
      r.headline = "(" + c.left + "|" + c.right + ") = " + fmt(v);
    });
  }
  for (const auto& c : s_.equivalence_checks) {
    Json inputs = {{"left", to_json(s_.state(c.left))}, {"right", to_json(s_.state(c.right))}};
    check("inner", c.left + "=" + c.right, "equivalent", std::move(inputs), [&](CheckRecord& r) {
      const auto& a = s_.state(c.left);
      const auto& b = s_.state(c.right);
      const double d = frob_norm(k_of(a, bridging_) - k_of(b, bridging_));
      const bool eq = physically_equal(a, b, bridging_, o_.tol);
      r.results["distance"] = d;
      r.results["equivalent"] = eq;
      r.pass = eq == c.expect;
      r.headline = std::string(eq ? "equivalent" : "distinct") + ", distance " + fmt(d);
    });
  }
}

void Runner::do_decompose() {
  for (const auto& c : s_.decompose_checks) {
    if (!in_scope(c.family)) continue;
    Json inputs = {{"state", to_json(s_.state(c.state))}, {"family", family_inputs(c.family)}};
    check("decompose", c.state + "@" + c.family, "decompose", std::move(inputs), [&](CheckRecord& r) {
      const auto d = decompose(s_.state(c.state), validated(c.family), bridging_);
      r.results["coefficients"] = complex_list(d.coefficients);
      r.results["residual"] = d.residual;
      bool ok = d.residual <= o_.tol;
      if (c.expect) ok = ok && close_list(d.coefficients, *c.expect, o_.tol);
      r.pass = ok;
      r.headline = fmt_list(d.coefficients) + ", residual " + fmt(d.residual);
    });
  }
  for (std::size_t k = 0; k < s_.conditional_checks.size(); ++k) {
    const auto& c = s_.conditional_checks[k];
    const auto label = c.state + "|" + s_.timeline.slot(c.slot).label + "." + std::to_string(c.subsystem) +
                       "#" + std::to_string(k + 1);
    Json inputs = {{"state", to_json(s_.state(c.state))},
                   {"slot", c.slot},
                   {"subsystem", c.subsystem},
                   {"projector", to_json(c.projector)}};
    check("decompose", label, "conditional", std::move(inputs), [&](CheckRecord& r) {
      const auto& psi = s_.state(c.state);
      const double w0 = weight(psi, bridging_);
      const auto part = condition_unnormalized(psi, c.slot, c.subsystem, c.projector, o_.tol);
      const double p = w0 > 0 ? weight(part, bridging_) / w0 : 0.0;
      const auto h = conditional_history(psi, c.slot, c.subsystem, c.projector, bridging_, o_.tol);
      r.results["condition_probability"] = p;
      r.results["conditional_history"] = to_json(h);
      bool ok = true;
      r.headline = "P(condition) " + fmt(p);
      if (c.expect) {
        const auto implied =
            condition_unnormalized(h, c.expect->slot, c.expect->subsystem, c.expect->projector, o_.tol);
        const double q = weight(implied, bridging_);
        r.results["implied_probability"] = q;
        ok = std::abs(q - 1.0) <= o_.tol;
        r.headline += ", implied " + fmt(q);
      }
      r.pass = ok;
    });
  }
}

void Runner::do_probabilities() {
  for (const auto& c : s_.probability_checks) {
    if (!in_scope(c.family)) continue;
    Json inputs = {{"state", to_json(s_.state(c.state))}, {"family", family_inputs(c.family)}};
    check("probabilities", c.state + "@" + c.family, "probabilities", std::move(inputs),
          [&](CheckRecord& r) {
            const auto p = probabilities(s_.state(c.state), validated(c.family), bridging_, o_.tol);
            r.results["probabilities"] = p;
            double total = 0;
            for (double x : p) total += x;
            r.results["total"] = total;
            r.pass = std::abs(total - 1.0) <= o_.tol && (!c.expect || close_list(p, *c.expect, o_.tol));
            r.headline = fmt_list(p);
          });
  }
  for (const auto& c : s_.distribution_checks) {
    const auto& obs = s_.observable(c.observable);
    if (!in_scope(obs.family)) continue;
    Json inputs = {{"state", to_json(s_.state(c.state))},
                   {"family", family_inputs(obs.family)},
                   {"values", obs.values}};
    check("probabilities", c.state + "@" + c.observable, "distribution", std::move(inputs),
          [&](CheckRecord& r) {
            const SpectralObservable so(validated(obs.family), obs.values);
            const auto dist = measure_distribution(s_.state(c.state), so, bridging_, o_.tol);
            Json d = Json::array();
            std::string text;
            for (const auto& [v, p] : dist) {
              d.push_back(Json::array({v, p}));
              text += (text.empty() ? "" : ", ") + fmt(v) + ": " + fmt(p);
            }
            r.results["distribution"] = std::move(d);
            bool ok = true;
            if (c.expect) {
              ok = dist.size() == c.expect->size();
              for (std::size_t i = 0; ok && i < dist.size(); ++i) {
                ok = std::abs(dist[i].first - (*c.expect)[i].first) <= o_.tol &&
                     std::abs(dist[i].second - (*c.expect)[i].second) <= o_.tol;
              }
            }
            r.pass = ok;
            r.headline = "{" + text + "}";
          });
  }
}

void Runner::do_eigenhistories() {
  for (const auto& c : s_.eigenhistory_checks) {
    Json ops = Json::array();
    for (const auto& name : c.operators) {
      Json fs = Json::array();
      const auto& f = s_.op(name).op.factors();
      for (auto it = f.rbegin(); it != f.rend(); ++it) fs.push_back(to_json(*it));
      ops.push_back(std::move(fs));
    }
    check("eigenhistories", c.name, "eigenhistories", {{"operators", std::move(ops)}},
          [&](CheckRecord& r) {
            std::vector<ProductHistoryOperator> list;
            for (const auto& name : c.operators) list.push_back(s_.op(name).op);
            const auto of = observable_family(list, bridging_, o_.seed, {o_.tol, o_.completeness});
            Json members = Json::array();
            for (std::size_t i = 0; i < of.family.size(); ++i) {
              members.push_back({{"eigenvalues", of.eigenvalues[i]},
                                 {"weight", of.family.report()->weights[i]},
                                 {"vector", to_json(of.eigenvectors[i])}});
            }
            r.results["members"] = std::move(members);
            r.results["validated"] = of.family.validated();
            bool ok = of.family.validated();
            if (!c.expect_members.empty()) {
              std::vector<bool> used(of.family.size(), false);
              bool all = c.expect_members.size() <= of.family.size();
              for (const auto& name : c.expect_members) {
                bool found = false;
                for (std::size_t i = 0; i < of.family.size() && !found; ++i) {
                  if (!used[i] && physically_equal(s_.state(name), of.family.member(i), bridging_, o_.tol)) {
                    used[i] = found = true;
                  }
                }
                all = all && found;
              }
              // Every computed member of nonzero weight must be accounted for.
              for (std::size_t i = 0; i < of.family.size(); ++i) {
                if (!used[i] && of.family.report()->weights[i] > o_.tol) all = false;
              }
              r.results["members_match"] = all;
              ok = ok && all;
            }
            if (!c.expect_vectors.empty()) {
              std::vector<double> best;
              std::vector<bool> used(of.eigenvectors.size(), false);
              bool all = true;
              for (const auto& e : c.expect_vectors) {
                double top = 0;
                std::size_t arg = 0;
                for (std::size_t i = 0; i < of.eigenvectors.size(); ++i) {
                  if (used[i]) continue;
                  const double ov = overlap(e, of.eigenvectors[i]);
                  if (ov > top) top = ov, arg = i;
                }
                if (top > 0) used[arg] = true;
                best.push_back(top);
                all = all && top >= 1.0 - 1e-9;
              }
              r.results["vector_overlaps"] = best;
              ok = ok && all;
            }
            r.pass = ok;
            r.headline = std::to_string(of.family.size()) + " eigenhistories" +
                         (of.family.validated() ? ", valid" : ", invalid");
          });
  }
}

void Runner::do_simulate() {
  for (const auto& m : s_.markings) {
    const Json base = serialize_scenario(s_)["markings"][m.name];
    check("simulate-marking", m.name, "simulate", base, [&](CheckRecord& r) {
      const auto sys = m.system(bridging_);
      const CKet final_state = simulate(sys);
      const double norm = final_state.norm();
      const double expected_norm = sys.initial_system().norm() * sys.initial_ancilla().norm();
      r.results["final"] = to_json(final_state);
      r.results["norm"] = norm;
      bool ok = std::abs(norm - expected_norm) <= o_.tol;
      r.headline = "norm " + fmt(norm);
      if (m.expect_final) {
        const double d = (final_state - *m.expect_final).cwiseAbs().maxCoeff();
        r.results["final_deviation"] = d;
        ok = ok && d <= o_.tol;
        r.headline += ", deviation " + fmt(d);
      }
      r.pass = ok;
    });
    for (std::size_t k = 0; k < m.measurements.size(); ++k) {
      const auto& mc = m.measurements[k];
      check("simulate-marking", m.name + "/measure" + std::to_string(k + 1), "measure", base,
            [&](CheckRecord& r) {
              const auto sys = m.system(bridging_);
              const CKet final_state = simulate(sys);
              const auto outcomes = measure_ancilla(final_state, s_.timeline.last_dim(), m.layout,
                                                    mc.register_index, mc.basis, o_.tol);
              const auto dn = static_cast<Eigen::Index>(s_.timeline.last_dim());
              const auto da = static_cast<Eigen::Index>(m.layout.total_dim());
              // Rows are system basis states, columns ancilla basis states.
              const CMatrix grid = final_state.reshaped(da, dn).transpose();
              Json list = Json::array();
              std::vector<double> probs;
              double branch_dev = 0;
              for (std::size_t q = 0; q < outcomes.size(); ++q) {
                const auto& o = outcomes[q];
                probs.push_back(o.probability);
                Json item = {{"probability", o.probability},
                             {"collapsed", o.collapsed ? to_json(*o.collapsed) : Json(nullptr)}};
                if (m.layout.size() == 1) {
                  const CKet branch = grid * mc.basis[q].conjugate();
                  item["branch"] = to_json(branch);
                  if (q < mc.expect_branches.size()) {
                    branch_dev = std::max(branch_dev, (branch - mc.expect_branches[q]).cwiseAbs().maxCoeff());
                  }
                }
                list.push_back(std::move(item));
              }
              r.results["outcomes"] = std::move(list);
              double total = 0;
              for (double p : probs) total += p;
              bool ok = std::abs(total - final_state.squaredNorm()) <= o_.tol;
              if (mc.expect) ok = ok && close_list(probs, *mc.expect, o_.tol);
              if (!mc.expect_branches.empty()) {
                if (m.layout.size() != 1) throw ShapeMismatch("branch expectations need a single register");
                r.results["branch_deviation"] = branch_dev;
                ok = ok && branch_dev <= o_.tol;
              }
              r.pass = ok;
              r.headline = fmt_list(probs);
            });
    }
  }
}

void Runner::do_branch_map() {
  for (const auto& m : s_.markings) {
    for (const auto& bc : m.branch_maps) {
      if (!in_scope(bc.family)) continue;
      Json inputs = {{"marking", serialize_scenario(s_)["markings"][m.name]},
                     {"family", family_inputs(bc.family)}};
      check("branch-map", m.name + "/" + bc.family, "branch-map", std::move(inputs), [&](CheckRecord& r) {
        const auto bm = compute_branch_map(m.system(bridging_), validated(bc.family), o_.tol);
        Json labels = Json::array();
        for (std::size_t i = 0; i < bm.labels.size(); ++i) {
          labels.push_back({{"member", s_.family(bc.family).members[i]},
                            {"active", static_cast<bool>(bm.active[i])},
                            {"coefficient", to_json(bm.coefficients[i])},
                            {"label", to_json(bm.labels[i])},
                            {"amplitude", to_json(bm.amplitudes[i])}});
        }
        r.results["branches"] = std::move(labels);
        r.results["residual"] = bm.residual;
        r.results["state_residual"] = bm.state_residual;
        r.results["labels_orthonormal"] = bm.labels_orthonormal;
        r.results["valid"] = bm.valid;
        r.pass = bm.valid == bc.expect_valid;
        r.headline = std::string(bm.valid ? "aligned" : "misaligned") + ", residual " + fmt(bm.residual) +
                     (bm.labels_orthonormal ? "" : ", labels not orthonormal");
      });
    }
  }
}

Json node_json(const OutcomeNode& n) {
  Json j = {{"stage", n.stage},
            {"register", n.register_index},
            {"outcome", n.outcome},
            {"conditional_probability", n.conditional_probability},
            {"joint_probability", n.joint_probability},
            {"collapsed", n.collapsed ? to_json(*n.collapsed) : Json(nullptr)},
            {"member_shares", n.member_shares},
            {"assigned_member", n.assigned_member ? Json(*n.assigned_member) : Json(nullptr)}};
  Json children = Json::array();
  for (const auto& c : n.children) children.push_back(node_json(c));
  j["children"] = std::move(children);
  return j;
}

// Conditional probabilities of the children of every populated node sum to 1.
bool tree_consistent(const std::vector<OutcomeNode>& nodes, double tol) {
  double total = 0;
  for (const auto& n : nodes) {
    total += n.conditional_probability;
    if (n.collapsed && !n.children.empty() && !tree_consistent(n.children, tol)) return false;
  }
  return nodes.empty() || std::abs(total - 1.0) <= tol;
}

void Runner::do_sequential() {
  for (const auto& m : s_.markings) {
    for (const auto& sc : m.sequential) {
      bool scoped = true;
      for (const auto& st : sc.stages) scoped = scoped && in_scope(st.family);
      if (!scoped) continue;
      Json inputs = {{"marking", serialize_scenario(s_)["markings"][m.name]}};
      check("sequential", m.name + "/" + sc.name, "sequential", std::move(inputs), [&](CheckRecord& r) {
        std::vector<MeasurementPlan> plans;
        for (const auto& st : sc.stages) plans.push_back({st.register_index, st.basis, validated(st.family)});
        const auto tree = sequential_measure(m.system(bridging_), plans, o_.tol);
        Json nodes = Json::array();
        std::vector<double> stage1;
        for (const auto& n : tree) {
          nodes.push_back(node_json(n));
          stage1.push_back(n.conditional_probability);
        }
        r.results["tree"] = std::move(nodes);
        r.results["stage1"] = stage1;
        bool ok = tree_consistent(tree, o_.tol);
        if (sc.expect_stage1) ok = ok && close_list(stage1, *sc.expect_stage1, o_.tol);
        r.pass = ok;
        r.headline = "stage 1 " + fmt_list(stage1);
      });
    }
  }
}

std::vector<CheckRecord> Runner::run() {
  const auto& c = o_.command;
  const bool all = c == "report-all";
  if (all || c == "validate") do_validate();
  if (all || c == "weight") do_weight();
  if (all || c == "inner") do_inner();
  if (all || c == "decompose") do_decompose();
  if (all || c == "probabilities") do_probabilities();
  if (all || c == "eigenhistories") do_eigenhistories();
  if (all || c == "simulate-marking") do_simulate();
  if (all || c == "branch-map") do_branch_map();
  if (all || c == "sequential") do_sequential();
  return std::move(out_);
}

Json snap(const Json& j) {
  if (j.is_number_float()) {
    double x = std::round(j.get<double>() * 1e12) / 1e12;
    if (x == 0) x = 0;  // drops the sign of -0
    return x;
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& x : j) out.push_back(snap(x));
    return out;
  }
  if (j.is_object()) {
    Json out = Json::object();
    for (const auto& [k, v] : j.items()) out[k] = snap(v);
    return out;
  }
  return j;
}

}  // namespace

const std::vector<std::string>& commands() { return kCommands; }

bool is_command(const std::string& name) {
  return std::find(kCommands.begin(), kCommands.end(), name) != kCommands.end();
}

bool Report::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

Report run(const Scenario& scenario, const RunOptions& options) {
  if (!is_command(options.command)) throw ParseError("unknown command '" + options.command + "'");
  Report r;
  r.scenario = scenario.id;
  r.options = options;
  r.checks = Runner(scenario, options).run();
  return r;
}

std::string digest(const Json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : snap(j).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json report_json(const Report& report) {
  Json out;
  out["schema"] = kReportSchema;
  out["scenario"] = report.scenario;
  out["command"] = report.options.command;
  out["tolerance"] = report.options.tol;
  out["seed"] = report.options.seed;
  out["completeness"] = report.options.completeness == Completeness::Exact ? "exact" : "physical";
  out["variant"] = report.options.variant ? Json(*report.options.variant) : Json(nullptr);
  Json checks = Json::array();
  std::size_t passed = 0;
  for (const auto& c : report.checks) {
    Json j;
    j["name"] = c.name;
    j["kind"] = c.kind;
    j["inputs_digest"] = digest(c.inputs);
    j["tolerance"] = report.options.tol;
    j["pass"] = c.pass;
    j["results"] = snap(c.results);
    if (!c.error.empty()) j["error"] = c.error;
    checks.push_back(std::move(j));
    passed += c.pass ? 1 : 0;
  }
  out["checks"] = std::move(checks);
  out["summary"] = {{"total", report.checks.size()},
                    {"passed", passed},
                    {"failed", report.checks.size() - passed}};
  return out;
}

namespace {

bool flat_array(const Json& j) {
  if (!j.is_array()) return false;
  for (const auto& x : j) {
    if (x.is_object()) return false;
    if (x.is_array()) {
      for (const auto& y : x) {
        if (y.is_structured()) return false;
      }
    }
  }
  return true;
}

void write(std::ostringstream& os, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  const std::string inner(static_cast<std::size_t>(2 * depth + 2), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    std::size_t k = 0;
    for (const auto& [key, v] : j.items()) {
      os << inner << Json(key).dump() << ": ";
      write(os, v, depth + 1);
      os << (++k < j.size() ? ",\n" : "\n");
    }
    os << pad << "}";
  } else if (j.is_array() && !flat_array(j)) {
    os << "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      os << inner;
      write(os, j[k], depth + 1);
      os << (k + 1 < j.size() ? ",\n" : "\n");
    }
    os << pad << "]";
  } else if (j.is_array()) {
    os << "[";
    for (std::size_t k = 0; k < j.size(); ++k) os << (k ? ", " : "") << j[k].dump();
    os << "]";
  } else {
    os << j.dump();
  }
}

}  // namespace

std::string dump_json(const Json& j) {
  std::ostringstream os;
  write(os, j, 0);
  os << "\n";
  return os.str();
}

std::string report_text(const Report& report) {
  std::ostringstream os;
  os << "scenario " << report.scenario << "  command " << report.options.command << "  tol "
     << fmt(report.options.tol) << "  seed " << report.options.seed << "\n";
  std::size_t width = 0;
  for (const auto& c : report.checks) width = std::max(width, c.name.size());
  std::size_t passed = 0;
  for (const auto& c : report.checks) {
    os << (c.pass ? "PASS  " : "FAIL  ") << c.name << std::string(width - c.name.size() + 2, ' ')
       << c.headline << "\n";
    passed += c.pass ? 1 : 0;
  }
  os << report.checks.size() << " checks, " << passed << " passed, "
     << report.checks.size() - passed << " failed\n";
  return os.str();
}

}  // namespace histstate
