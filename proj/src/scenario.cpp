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

#include "histstate/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "histstate/scalar_expr.hpp"

namespace histstate {

namespace {

std::string join_path(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string join_path(const std::string& base, std::size_t index) {
  return base + "/" + std::to_string(index);
}

[[noreturn]] void parse_fail(const std::string& path, const std::string& why) {
  throw ParseError("at " + path + ": " + why);
}
[[noreturn]] void resolve_fail(const std::string& path, const std::string& why) {
  throw ResolutionError("at " + path + ": " + why);
}
[[noreturn]] void shape_fail(const std::string& path, const std::string& why) {
  throw ShapeError("at " + path + ": " + why);
}

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path, "missing key '" + key + "'");
  return *it;
}

std::string require_string(const Json& obj, const std::string& key, const std::string& path) {
  const Json& v = require(obj, key, path);
  if (!v.is_string()) parse_fail(join_path(path, key), "expected a string");
  return v.get<std::string>();
}

const Json& require_array(const Json& v, const std::string& path) {
  if (!v.is_array()) parse_fail(path, "expected an array");
  return v;
}

std::size_t require_count(const Json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    parse_fail(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

class Resolver {
 public:
  explicit Resolver(const Json& doc) : doc_(doc) {}

  Scenario run();

 private:
  Complex scalar(const Json& v, const std::string& path) const;
  double real(const Json& v, const std::string& path) const;
  CKet ket_entries(const Json& v, const std::string& path) const;
  CKet ket_ref(const Json& v, const std::string& path, std::optional<std::size_t> dim) const;
  CMatrix matrix_inline(const Json& v, const std::string& path) const;
  CMatrix matrix_ref(const Json& v, const std::string& path, std::size_t dim) const;
  CMatrix factor(const Json& v, const std::string& path, std::size_t dim,
                 const std::vector<std::size_t>& subsystems) const;
  std::size_t slot_ref(const Json& v, const std::string& path) const;

  void parse_timeline();
  void parse_named_kets();
  void parse_named_matrices();
  void parse_bridging();
  void parse_states();
  HistoryState parse_state(const Json& v, const std::string& path) const;
  void parse_families();
  void parse_operators();
  void parse_observables();
  void parse_checks();
  void parse_markings();
  MarkingScenario parse_marking(const std::string& name, const Json& v, const std::string& path) const;

  void require_state(const std::string& name, const std::string& path) const;
  void require_family(const std::string& name, const std::string& path) const;

  const Json& doc_;
  Scenario s_;
  NamedRegistry registry_;
};

Complex Resolver::scalar(const Json& v, const std::string& path) const {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_string()) {
    try {
      return eval_scalar(v.get<std::string>(), s_.parameters);
    } catch (const ParseError& e) {
      parse_fail(path, e.detail());
    }
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  parse_fail(path, "expected a number, an expression string, or [re, im]");
}

double Resolver::real(const Json& v, const std::string& path) const {
  const Complex c = scalar(v, path);
  if (std::abs(c.imag()) > 1e-14) parse_fail(path, "expected a real value");
  return c.real();
}

CKet Resolver::ket_entries(const Json& v, const std::string& path) const {
  require_array(v, path);
  CKet out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = scalar(v[i], join_path(path, i));
  return out;
}

CKet Resolver::ket_ref(const Json& v, const std::string& path,
                       std::optional<std::size_t> dim) const {
  CKet out;
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    if (!registry_.has_ket(name)) resolve_fail(path, "undefined ket '" + name + "'");
    out = registry_.ket(name);
  } else {
    out = ket_entries(v, path);
  }
  if (dim && static_cast<std::size_t>(out.size()) != *dim) {
    shape_fail(path, "ket has dimension " + std::to_string(out.size()) + ", expected " +
                         std::to_string(*dim));
  }
  return out;
}

CMatrix Resolver::matrix_inline(const Json& v, const std::string& path) const {
  require_array(v, path);
  if (v.empty()) shape_fail(path, "empty matrix");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  CMatrix out;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto rp = join_path(path, r);
    require_array(v[r], rp);
    if (r == 0) {
      cols = v[r].size();
      out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (v[r].size() != cols) {
      shape_fail(rp, "ragged matrix row");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = scalar(v[r][c], join_path(rp, c));
    }
  }
  return out;
}

CMatrix Resolver::matrix_ref(const Json& v, const std::string& path, std::size_t dim) const {
  CMatrix out;
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    if (name == "1") {
      out = identity(dim);
    } else if (registry_.has_matrix(name)) {
      out = registry_.matrix(name);
    } else {
      resolve_fail(path, "undefined matrix '" + name + "'");
    }
  } else {
    out = matrix_inline(v, path);
  }
  const auto d = static_cast<Eigen::Index>(dim);
  if (out.rows() != d || out.cols() != d) {
    shape_fail(path, "matrix is " + std::to_string(out.rows()) + "x" + std::to_string(out.cols()) +
                         ", expected " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  return out;
}

// Factor grammar: "1", "[k]", "[k1,k2,...]" (one entry per subsystem, each a
// ket name or 1), "|a><b|", a matrix name, or an inline matrix.
CMatrix Resolver::factor(const Json& v, const std::string& path, std::size_t dim,
                         const std::vector<std::size_t>& subsystems) const {
  if (!v.is_string()) return matrix_ref(v, path, dim);
  std::string text = v.get<std::string>();
  text.erase(std::remove(text.begin(), text.end(), ' '), text.end());
  if (text.size() >= 2 && text.front() == '[' && text.back() == ']') {
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(1, text.size() - 2));
    for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
    std::vector<std::size_t> dims = subsystems;
    if (parts.size() == 1) dims = {dim};
    if (parts.size() != dims.size()) {
      shape_fail(path, "'" + text + "' has " + std::to_string(parts.size()) +
                           " entries for a slot with " + std::to_string(dims.size()) +
                           " subsystems");
    }
    std::vector<CMatrix> blocks;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (parts[k] == "1") {
        blocks.push_back(identity(dims[k]));
        continue;
      }
      if (!registry_.has_ket(parts[k])) resolve_fail(path, "undefined ket '" + parts[k] + "'");
      const CKet& ket = registry_.ket(parts[k]);
      if (static_cast<std::size_t>(ket.size()) != dims[k]) {
        shape_fail(path, "ket '" + parts[k] + "' has dimension " + std::to_string(ket.size()) +
                             ", expected " + std::to_string(dims[k]));
      }
      try {
        blocks.push_back(projector(ket));
      } catch (const NormalizationError& e) {
        shape_fail(path, e.detail());
      }
    }
    return kron_all(blocks);
  }
  if (text.size() > 4 && text.front() == '|' && text.back() == '|') {
    const auto mid = text.find("><");
    if (mid != std::string::npos) {
      const auto a = text.substr(1, mid - 1);
      const auto b = text.substr(mid + 2, text.size() - mid - 3);
      for (const auto& k : {a, b}) {
        if (!registry_.has_ket(k)) resolve_fail(path, "undefined ket '" + k + "'");
      }
      const CMatrix m = outer(registry_.ket(a), registry_.ket(b));
      if (m.rows() != static_cast<Eigen::Index>(dim) || m.cols() != static_cast<Eigen::Index>(dim)) {
        shape_fail(path, "outer product has the wrong shape");
      }
      return m;
    }
  }
  return matrix_ref(v, path, dim);
}

std::size_t Resolver::slot_ref(const Json& v, const std::string& path) const {
  if (v.is_string()) {
    try {
      return s_.timeline.index_of(v.get<std::string>());
    } catch (const ResolutionError&) {
      resolve_fail(path, "undefined time slot '" + v.get<std::string>() + "'");
    }
  }
  const auto idx = require_count(v, path);
  if (idx >= s_.timeline.size()) shape_fail(path, "slot index out of range");
  return idx;
}

void Resolver::require_state(const std::string& name, const std::string& path) const {
  for (const auto& st : s_.states) {
    if (st.name == name) return;
  }
  resolve_fail(path, "undefined history state '" + name + "'");
}

void Resolver::require_family(const std::string& name, const std::string& path) const {
  for (const auto& f : s_.families) {
    if (f.name == name) return;
  }
  resolve_fail(path, "undefined family '" + name + "'");
}

void Resolver::parse_timeline() {
  const std::string path = "/timeline";
  const Json& tl = require_array(require(doc_, "timeline", ""), path);
  if (tl.empty()) shape_fail(path, "a timeline needs at least one slot");
  std::vector<Slot> slots;
  std::set<std::string> seen;
  for (std::size_t j = 0; j < tl.size(); ++j) {
    const auto p = join_path(path, j);
    Slot slot;
    slot.label = require_string(tl[j], "label", p);
    if (!seen.insert(slot.label).second) parse_fail(p, "duplicate slot label '" + slot.label + "'");
    slot.dim = require_count(require(tl[j], "dim", p), join_path(p, "dim"));
    if (slot.dim == 0) shape_fail(join_path(p, "dim"), "dimension must be positive");
    if (auto it = tl[j].find("subsystems"); it != tl[j].end()) {
      const auto sp = join_path(p, "subsystems");
      for (std::size_t k = 0; k < require_array(*it, sp).size(); ++k) {
        slot.subsystems.push_back(require_count((*it)[k], join_path(sp, k)));
      }
      std::size_t prod = 1;
      for (auto d : slot.subsystems) prod *= d;
      if (prod != slot.dim) shape_fail(sp, "subsystem dimensions do not multiply to dim");
    }
    slots.push_back(std::move(slot));
  }
  s_.timeline = Timeline(std::move(slots));
}

void Resolver::parse_named_kets() {
  auto it = doc_.find("kets");
  if (it == doc_.end()) return;
  if (!it->is_object()) parse_fail("/kets", "expected an object");
  for (const auto& [name, v] : it->items()) {
    const auto p = join_path("/kets", name);
    CKet ket;
    if (v.is_object()) {
      const auto dim = require_count(require(v, "dim", p), join_path(p, "dim"));
      ket = ket_entries(require(v, "amplitudes", p), join_path(p, "amplitudes"));
      if (static_cast<std::size_t>(ket.size()) != dim) {
        shape_fail(p, "ket '" + name + "' declares dim " + std::to_string(dim) + " but has " +
                          std::to_string(ket.size()) + " amplitudes");
      }
    } else {
      ket = ket_entries(v, p);
    }
    if (ket.size() == 0) shape_fail(p, "empty ket");
    registry_.add_ket(name, ket);
    s_.kets.emplace_back(name, ket);
  }
}

void Resolver::parse_named_matrices() {
  auto it = doc_.find("matrices");
  if (it == doc_.end()) return;
  if (!it->is_object()) parse_fail("/matrices", "expected an object");
  for (const auto& [name, v] : it->items()) {
    const auto p = join_path("/matrices", name);
    CMatrix m = matrix_inline(v, p);
    registry_.add_matrix(name, m);
    s_.matrices.emplace_back(name, m);
  }
}

void Resolver::parse_bridging() {
  const auto& tl = s_.timeline;
  auto it = doc_.find("bridging");
  if (it == doc_.end() || (it->is_string() && it->get<std::string>() == "trivial")) {
    for (std::size_t j = 0; j + 1 < tl.size(); ++j) {
      if (tl.dim(j) != tl.dim(j + 1)) shape_fail("/bridging", "trivial bridging needs equal dims");
      s_.bridging_steps.push_back(identity(tl.dim(j)));
    }
  } else {
    const Json& steps = require_array(*it, "/bridging");
    if (steps.size() + 1 != tl.size()) {
      shape_fail("/bridging", "expected " + std::to_string(tl.size() - 1) + " steps");
    }
    for (std::size_t j = 0; j < steps.size(); ++j) {
      const auto p = join_path("/bridging", j);
      CMatrix m;
      if (steps[j].is_string() && steps[j].get<std::string>() != "1") {
        const auto name = steps[j].get<std::string>();
        if (!registry_.has_matrix(name)) resolve_fail(p, "undefined matrix '" + name + "'");
        m = registry_.matrix(name);
      } else if (steps[j].is_string()) {
        m = matrix_ref(steps[j], p, tl.dim(j));
      } else {
        m = matrix_inline(steps[j], p);
      }
      if (m.rows() != static_cast<Eigen::Index>(tl.dim(j + 1)) ||
          m.cols() != static_cast<Eigen::Index>(tl.dim(j))) {
        shape_fail(p, "bridging step has the wrong shape");
      }
      s_.bridging_steps.push_back(std::move(m));
    }
  }
  try {
    (void)BridgingSet(tl, s_.bridging_steps);
  } catch (const ShapeMismatch& e) {
    shape_fail("/bridging", e.detail());
  }
}

HistoryState Resolver::parse_state(const Json& v, const std::string& path) const {
  const auto& tl = s_.timeline;
  if (!v.is_object()) parse_fail(path, "expected an object");
  if (auto it = v.find("terms"); it != v.end()) {
    std::vector<ChainTerm> terms;
    const auto tp = join_path(path, "terms");
    for (std::size_t t = 0; t < require_array(*it, tp).size(); ++t) {
      const auto p = join_path(tp, t);
      const Json& term = (*it)[t];
      ChainTerm ct;
      if (auto c = term.find("coeff"); c != term.end()) ct.coeff = scalar(*c, join_path(p, "coeff"));
      const auto cp = join_path(p, "chain");
      const Json& chain = require_array(require(term, "chain", p), cp);
      if (chain.size() != tl.size()) {
        shape_fail(cp, "chain has " + std::to_string(chain.size()) + " factors for " +
                           std::to_string(tl.size()) + " slots");
      }
      // Written latest slot first.
      ct.factors.resize(tl.size());
      for (std::size_t k = 0; k < chain.size(); ++k) {
        const std::size_t slot = tl.size() - 1 - k;
        ct.factors[slot] = factor(chain[k], join_path(cp, k), tl.dim(slot), tl.slot(slot).subsystems);
      }
      terms.push_back(std::move(ct));
    }
    return HistoryState(tl, std::move(terms));
  }
  if (auto it = v.find("sum"); it != v.end()) {
    HistoryState out(tl);
    const auto sp = join_path(path, "sum");
    for (std::size_t k = 0; k < require_array(*it, sp).size(); ++k) {
      const auto p = join_path(sp, k);
      const auto name = require_string((*it)[k], "state", p);
      require_state(name, join_path(p, "state"));
      Complex c = 1.0;
      if (auto ci = (*it)[k].find("coeff"); ci != (*it)[k].end()) c = scalar(*ci, join_path(p, "coeff"));
      out = out + scale(c, s_.state(name));
    }
    return out;
  }
  if (auto it = v.find("outer"); it != v.end()) {
    const auto op = join_path(path, "outer");
    const CKet ket = ket_ref(require(*it, "ket", op), join_path(op, "ket"), tl.history_dim());
    Complex c = 1.0;
    if (auto ci = it->find("scale"); ci != it->end()) c = scalar(*ci, join_path(op, "scale"));
    return scale(c, outer_history(tl, ket));
  }
  parse_fail(path, "a history state needs 'terms', 'sum' or 'outer'");
}

void Resolver::parse_states() {
  auto it = doc_.find("history_states");
  if (it == doc_.end()) return;
  if (!it->is_object()) parse_fail("/history_states", "expected an object");
  for (const auto& [name, v] : it->items()) {
    const auto p = join_path("/history_states", name);
    for (const auto& st : s_.states) {
      if (st.name == name) parse_fail(p, "duplicate history state");
    }
    s_.states.push_back({name, parse_state(v, p)});
  }
}

void Resolver::parse_families() {
  auto it = doc_.find("families");
  if (it == doc_.end()) return;
  if (!it->is_object()) parse_fail("/families", "expected an object");
  for (const auto& [name, v] : it->items()) {
    const auto p = join_path("/families", name);
    ScenarioFamily f;
    f.name = name;
    const auto mp = join_path(p, "members");
    const Json& members = require_array(require(v, "members", p), mp);
    if (members.empty()) shape_fail(mp, "a family needs at least one member");
    for (std::size_t k = 0; k < members.size(); ++k) {
      if (!members[k].is_string()) parse_fail(join_path(mp, k), "expected a state name");
      f.members.push_back(members[k].get<std::string>());
      require_state(f.members.back(), join_path(mp, k));
    }
    if (auto vi = v.find("variant"); vi != v.end()) {
      if (!vi->is_string()) parse_fail(join_path(p, "variant"), "expected a string");
      f.variant = vi->get<std::string>();
    }
    if (auto ci = v.find("expect_coefficients"); ci != v.end()) {
      const auto cp = join_path(p, "expect_coefficients");
      std::vector<Complex> cs;
      for (std::size_t k = 0; k < require_array(*ci, cp).size(); ++k) cs.push_back(scalar((*ci)[k], join_path(cp, k)));
      if (cs.size() != f.members.size()) shape_fail(cp, "one coefficient per member expected");
      f.expect_coefficients = std::move(cs);
    }
    s_.families.push_back(std::move(f));
  }
}

void Resolver::parse_operators() {
  auto it = doc_.find("operators");
  if (it == doc_.end()) return;
  if (!it->is_object()) parse_fail("/operators", "expected an object");
  const auto& tl = s_.timeline;
  for (const auto& [name, v] : it->items()) {
    const auto p = join_path("/operators", name);
    const auto fp = join_path(p, "factors");
    const Json& fs = require_array(require(v, "factors", p), fp);
    if (fs.size() != tl.size()) shape_fail(fp, "one factor per slot expected");
    std::vector<CMatrix> factors(tl.size());
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const std::size_t slot = tl.size() - 1 - k;
      factors[slot] = factor(fs[k], join_path(fp, k), tl.dim(slot), tl.slot(slot).subsystems);
    }
    s_.operators.push_back({name, ProductHistoryOperator(tl, std::move(factors))});
  }
}

void Resolver::parse_observables() {
  auto it = doc_.find("observables");
  if (it == doc_.end()) return;
  if (!it->is_object()) parse_fail("/observables", "expected an object");
  for (const auto& [name, v] : it->items()) {
    const auto p = join_path("/observables", name);
    ScenarioObservable o;
    o.name = name;
    o.family = require_string(v, "family", p);
    require_family(o.family, join_path(p, "family"));
    const auto vp = join_path(p, "values");
    for (std::size_t k = 0; k < require_array(require(v, "values", p), vp).size(); ++k) {
      o.values.push_back(real(v["values"][k], join_path(vp, k)));
    }
    if (o.values.size() != s_.family(o.family).members.size()) {
      shape_fail(vp, "one value per family member expected");
    }
    s_.observables.push_back(std::move(o));
  }
}

void Resolver::parse_checks() {
  auto it = doc_.find("checks");
  if (it == doc_.end()) return;
  const Json& checks = *it;
  if (!checks.is_object()) parse_fail("/checks", "expected an object");
  static const std::set<std::string> known = {"weight", "inner", "equivalent", "decompose",
                                              "probabilities", "distribution", "compatible",
                                              "conditional", "eigenhistories"};
  for (const auto& [key, _] : checks.items()) {
    if (!known.count(key)) parse_fail(join_path("/checks", key), "unknown check kind");
  }
  auto each = [&](const char* key, auto&& fn) {
    auto ci = checks.find(key);
    if (ci == checks.end()) return;
    const auto base = join_path("/checks", key);
    for (std::size_t k = 0; k < require_array(*ci, base).size(); ++k) fn((*ci)[k], join_path(base, k));
  };
  auto state_key = [&](const Json& v, const char* key, const std::string& p) {
    auto name = require_string(v, key, p);
    require_state(name, join_path(p, key));
    return name;
  };
  auto family_key = [&](const Json& v, const char* key, const std::string& p) {
    auto name = require_string(v, key, p);
    require_family(name, join_path(p, key));
    return name;
  };
  const auto& tl = s_.timeline;

  each("weight", [&](const Json& v, const std::string& p) {
    WeightCheck c;
    c.state = state_key(v, "state", p);
    if (auto e = v.find("expect"); e != v.end()) c.expect = real(*e, join_path(p, "expect"));
    if (auto e = v.find("expect_k"); e != v.end()) {
      c.expect_k = matrix_inline(*e, join_path(p, "expect_k"));
      if (c.expect_k->rows() != static_cast<Eigen::Index>(tl.last_dim()) ||
          c.expect_k->cols() != static_cast<Eigen::Index>(tl.first_dim())) {
        shape_fail(join_path(p, "expect_k"), "K image must be dim(t_n) x dim(t_1)");
      }
    }
    s_.weight_checks.push_back(std::move(c));
  });
  each("inner", [&](const Json& v, const std::string& p) {
    InnerCheck c;
    c.left = state_key(v, "left", p);
    c.right = state_key(v, "right", p);
    if (auto e = v.find("expect"); e != v.end()) c.expect = scalar(*e, join_path(p, "expect"));
    s_.inner_checks.push_back(std::move(c));
  });
  each("equivalent", [&](const Json& v, const std::string& p) {
    EquivalenceCheck c;
    c.left = state_key(v, "left", p);
    c.right = state_key(v, "right", p);
    if (auto e = v.find("expect"); e != v.end()) {
      if (!e->is_boolean()) parse_fail(join_path(p, "expect"), "expected a boolean");
      c.expect = e->get<bool>();
    }
    s_.equivalence_checks.push_back(std::move(c));
  });
  each("decompose", [&](const Json& v, const std::string& p) {
    DecomposeCheck c;
    c.state = state_key(v, "state", p);
    c.family = family_key(v, "family", p);
    if (auto e = v.find("expect"); e != v.end()) {
      std::vector<Complex> xs;
      const auto ep = join_path(p, "expect");
      for (std::size_t k = 0; k < require_array(*e, ep).size(); ++k) xs.push_back(scalar((*e)[k], join_path(ep, k)));
      if (xs.size() != s_.family(c.family).members.size()) shape_fail(ep, "one value per member expected");
      c.expect = std::move(xs);
    }
    s_.decompose_checks.push_back(std::move(c));
  });
  each("probabilities", [&](const Json& v, const std::string& p) {
    ProbabilityCheck c;
    c.state = state_key(v, "state", p);
    c.family = family_key(v, "family", p);
    if (auto e = v.find("expect"); e != v.end()) {
      std::vector<double> xs;
      const auto ep = join_path(p, "expect");
      for (std::size_t k = 0; k < require_array(*e, ep).size(); ++k) xs.push_back(real((*e)[k], join_path(ep, k)));
      if (xs.size() != s_.family(c.family).members.size()) shape_fail(ep, "one value per member expected");
      c.expect = std::move(xs);
    }
    s_.probability_checks.push_back(std::move(c));
  });
  each("distribution", [&](const Json& v, const std::string& p) {
    DistributionCheck c;
    c.state = state_key(v, "state", p);
    c.observable = require_string(v, "observable", p);
    bool found = false;
    for (const auto& o : s_.observables) found = found || o.name == c.observable;
    if (!found) resolve_fail(join_path(p, "observable"), "undefined observable '" + c.observable + "'");
    if (auto e = v.find("expect"); e != v.end()) {
      std::vector<std::pair<double, double>> xs;
      const auto ep = join_path(p, "expect");
      for (std::size_t k = 0; k < require_array(*e, ep).size(); ++k) {
        const auto kp = join_path(ep, k);
        const Json& pair = require_array((*e)[k], kp);
        if (pair.size() != 2) shape_fail(kp, "expected [value, probability]");
        xs.emplace_back(real(pair[0], join_path(kp, 0)), real(pair[1], join_path(kp, 1)));
      }
      c.expect = std::move(xs);
    }
    s_.distribution_checks.push_back(std::move(c));
  });
  each("compatible", [&](const Json& v, const std::string& p) {
    CompatibilityCheck c;
    c.from = family_key(v, "from", p);
    c.to = family_key(v, "to", p);
    if (auto e = v.find("expect"); e != v.end()) {
      if (!e->is_boolean()) parse_fail(join_path(p, "expect"), "expected a boolean");
      c.expect = e->get<bool>();
    }
    if (auto e = v.find("expect_transform"); e != v.end()) {
      c.expect_transform = matrix_inline(*e, join_path(p, "expect_transform"));
      if (c.expect_transform->rows() != static_cast<Eigen::Index>(s_.family(c.to).members.size()) ||
          c.expect_transform->cols() != static_cast<Eigen::Index>(s_.family(c.from).members.size())) {
        shape_fail(join_path(p, "expect_transform"), "transform must be |to| x |from|");
      }
    }
    s_.compatibility_checks.push_back(std::move(c));
  });
  auto sub_dim = [&](std::size_t slot, std::size_t sub, const std::string& p) {
    const auto& subs = tl.slot(slot).subsystems;
    if (subs.empty()) {
      if (sub != 0) shape_fail(p, "slot declares no subsystems");
      return tl.dim(slot);
    }
    if (sub >= subs.size()) shape_fail(p, "subsystem index out of range");
    return subs[sub];
  };
  each("conditional", [&](const Json& v, const std::string& p) {
    ConditionalCheck c;
    c.state = state_key(v, "state", p);
    c.slot = slot_ref(require(v, "slot", p), join_path(p, "slot"));
    if (auto e = v.find("subsystem"); e != v.end()) c.subsystem = require_count(*e, join_path(p, "subsystem"));
    const auto d = sub_dim(c.slot, c.subsystem, join_path(p, "subsystem"));
    c.projector = factor(require(v, "projector", p), join_path(p, "projector"), d, {});
    if (!is_projector(c.projector)) shape_fail(join_path(p, "projector"), "not a projector");
    if (auto e = v.find("expect"); e != v.end()) {
      const auto ep = join_path(p, "expect");
      ReducedExpectation r;
      r.slot = slot_ref(require(*e, "slot", ep), join_path(ep, "slot"));
      if (auto si = e->find("subsystem"); si != e->end()) r.subsystem = require_count(*si, join_path(ep, "subsystem"));
      const auto rd = sub_dim(r.slot, r.subsystem, join_path(ep, "subsystem"));
      if (auto ki = e->find("ket"); ki != e->end()) {
        r.projector = projector(ket_ref(*ki, join_path(ep, "ket"), rd));
      } else {
        r.projector = matrix_ref(require(*e, "projector", ep), join_path(ep, "projector"), rd);
      }
      c.expect = std::move(r);
    }
    s_.conditional_checks.push_back(std::move(c));
  });
  each("eigenhistories", [&](const Json& v, const std::string& p) {
    EigenhistoryCheck c;
    c.name = require_string(v, "name", p);
    const auto op = join_path(p, "operators");
    for (std::size_t k = 0; k < require_array(require(v, "operators", p), op).size(); ++k) {
      const Json& n = v["operators"][k];
      if (!n.is_string()) parse_fail(join_path(op, k), "expected an operator name");
      const auto name = n.get<std::string>();
      bool found = false;
      for (const auto& o : s_.operators) found = found || o.name == name;
      if (!found) resolve_fail(join_path(op, k), "undefined operator '" + name + "'");
      c.operators.push_back(name);
    }
    if (c.operators.empty()) shape_fail(op, "at least one operator expected");
    if (auto e = v.find("expect_members"); e != v.end()) {
      const auto ep = join_path(p, "expect_members");
      for (std::size_t k = 0; k < require_array(*e, ep).size(); ++k) {
        if (!(*e)[k].is_string()) parse_fail(join_path(ep, k), "expected a state name");
        c.expect_members.push_back((*e)[k].get<std::string>());
        require_state(c.expect_members.back(), join_path(ep, k));
      }
    }
    if (auto e = v.find("expect_vectors"); e != v.end()) {
      const auto ep = join_path(p, "expect_vectors");
      for (std::size_t k = 0; k < require_array(*e, ep).size(); ++k) {
        c.expect_vectors.push_back(ket_ref((*e)[k], join_path(ep, k), tl.history_dim()));
      }
    }
    s_.eigenhistory_checks.push_back(std::move(c));
  });
}

MarkingScenario Resolver::parse_marking(const std::string& name, const Json& v,
                                        const std::string& path) const {
  const auto& tl = s_.timeline;
  MarkingScenario m;
  m.name = name;
  std::vector<std::size_t> regs;
  const auto rp = join_path(path, "registers");
  for (std::size_t k = 0; k < require_array(require(v, "registers", path), rp).size(); ++k) {
    regs.push_back(require_count(v["registers"][k], join_path(rp, k)));
    if (regs.back() == 0) shape_fail(join_path(rp, k), "register dimension must be positive");
  }
  m.layout = AncillaLayout(regs);
  const std::size_t da = m.layout.total_dim();
  m.initial_system = ket_ref(require(v, "initial_system", path), join_path(path, "initial_system"),
                             tl.first_dim());
  const auto ip = join_path(path, "initial_ancilla");
  const Json& init = require_array(require(v, "initial_ancilla", path), ip);
  if (init.size() != regs.size()) shape_fail(ip, "one ket per register expected");
  for (std::size_t k = 0; k < init.size(); ++k) {
    m.initial_registers.push_back(ket_ref(init[k], join_path(ip, k), regs[k]));
  }

  auto ancilla_op = [&](const Json& a, const std::string& p) -> CMatrix {
    if (a.is_array() && !a.empty() && a[0].is_object()) {
      CMatrix out = identity(da);
      for (std::size_t k = 0; k < a.size(); ++k) {
        const auto kp = join_path(p, k);
        const auto reg = require_count(require(a[k], "register", kp), join_path(kp, "register"));
        if (reg >= regs.size()) shape_fail(join_path(kp, "register"), "no such register");
        out = m.layout.embed(reg, matrix_ref(require(a[k], "op", kp), join_path(kp, "op"), regs[reg])) * out;
      }
      return out;
    }
    return matrix_ref(a, p, da);
  };

  if (auto si = v.find("schedule"); si != v.end()) {
    const auto sp = join_path(path, "schedule");
    for (std::size_t k = 0; k < require_array(*si, sp).size(); ++k) {
      const auto kp = join_path(sp, k);
      const Json& step = (*si)[k];
      const auto slot = slot_ref(require(step, "slot", kp), join_path(kp, "slot"));
      std::vector<Control> controls;
      const auto cp = join_path(kp, "controls");
      for (std::size_t c = 0; c < require_array(require(step, "controls", kp), cp).size(); ++c) {
        const auto ccp = join_path(cp, c);
        const Json& ctl = step["controls"][c];
        controls.push_back({factor(require(ctl, "projector", ccp), join_path(ccp, "projector"),
                                   tl.dim(slot), tl.slot(slot).subsystems),
                            ancilla_op(require(ctl, "ancilla", ccp), join_path(ccp, "ancilla"))});
      }
      try {
        m.schedule.emplace_back(slot, std::move(controls));
      } catch (const InvalidStep& e) {
        shape_fail(kp, e.detail());
      }
    }
  }
  if (auto e = v.find("expect_final"); e != v.end()) {
    m.expect_final = ket_ref(*e, join_path(path, "expect_final"), tl.last_dim() * da);
  }
  auto basis_of = [&](const Json& b, const std::string& p, std::size_t reg) {
    std::vector<CKet> out;
    for (std::size_t k = 0; k < require_array(b, p).size(); ++k) {
      out.push_back(ket_ref(b[k], join_path(p, k), regs.at(reg)));
    }
    return out;
  };
  auto register_of = [&](const Json& obj, const std::string& p) {
    const auto reg = require_count(require(obj, "register", p), join_path(p, "register"));
    if (reg >= regs.size()) shape_fail(join_path(p, "register"), "no such register");
    return reg;
  };
  if (auto bi = v.find("branch_maps"); bi != v.end()) {
    const auto bp = join_path(path, "branch_maps");
    for (std::size_t k = 0; k < require_array(*bi, bp).size(); ++k) {
      const auto kp = join_path(bp, k);
      BranchCheck b;
      b.family = require_string((*bi)[k], "family", kp);
      require_family(b.family, join_path(kp, "family"));
      if (auto e = (*bi)[k].find("expect_valid"); e != (*bi)[k].end()) {
        if (!e->is_boolean()) parse_fail(join_path(kp, "expect_valid"), "expected a boolean");
        b.expect_valid = e->get<bool>();
      }
      m.branch_maps.push_back(std::move(b));
    }
  }
  if (auto mi = v.find("measurements"); mi != v.end()) {
    const auto mp = join_path(path, "measurements");
    for (std::size_t k = 0; k < require_array(*mi, mp).size(); ++k) {
      const auto kp = join_path(mp, k);
      const Json& mv = (*mi)[k];
      MeasureCheck mc;
      mc.register_index = register_of(mv, kp);
      mc.basis = basis_of(require(mv, "basis", kp), join_path(kp, "basis"), mc.register_index);
      if (auto e = mv.find("expect"); e != mv.end()) {
        std::vector<double> xs;
        const auto ep = join_path(kp, "expect");
        for (std::size_t q = 0; q < require_array(*e, ep).size(); ++q) xs.push_back(real((*e)[q], join_path(ep, q)));
        if (xs.size() != mc.basis.size()) shape_fail(ep, "one probability per basis vector expected");
        mc.expect = std::move(xs);
      }
      if (auto e = mv.find("expect_branches"); e != mv.end()) {
        const auto ep = join_path(kp, "expect_branches");
        for (std::size_t q = 0; q < require_array(*e, ep).size(); ++q) {
          mc.expect_branches.push_back(ket_ref((*e)[q], join_path(ep, q), tl.last_dim()));
        }
        if (mc.expect_branches.size() != mc.basis.size()) shape_fail(ep, "one branch per basis vector expected");
      }
      m.measurements.push_back(std::move(mc));
    }
  }
  if (auto qi = v.find("sequential"); qi != v.end()) {
    const auto qp = join_path(path, "sequential");
    for (std::size_t k = 0; k < require_array(*qi, qp).size(); ++k) {
      const auto kp = join_path(qp, k);
      const Json& qv = (*qi)[k];
      SequentialCheck sc;
      sc.name = require_string(qv, "name", kp);
      const auto stp = join_path(kp, "stages");
      for (std::size_t q = 0; q < require_array(require(qv, "stages", kp), stp).size(); ++q) {
        const auto sp = join_path(stp, q);
        const Json& st = qv["stages"][q];
        StageSpec spec;
        spec.register_index = register_of(st, sp);
        spec.basis = basis_of(require(st, "basis", sp), join_path(sp, "basis"), spec.register_index);
        spec.family = require_string(st, "family", sp);
        require_family(spec.family, join_path(sp, "family"));
        sc.stages.push_back(std::move(spec));
      }
      if (auto e = qv.find("expect_stage1"); e != qv.end()) {
        std::vector<double> xs;
        const auto ep = join_path(kp, "expect_stage1");
        for (std::size_t q = 0; q < require_array(*e, ep).size(); ++q) xs.push_back(real((*e)[q], join_path(ep, q)));
        sc.expect_stage1 = std::move(xs);
      }
      m.sequential.push_back(std::move(sc));
    }
  }
  return m;
}

void Resolver::parse_markings() {
  auto it = doc_.find("markings");
  if (it == doc_.end()) return;
  if (!it->is_object()) parse_fail("/markings", "expected an object");
  for (const auto& [name, v] : it->items()) {
    s_.markings.push_back(parse_marking(name, v, join_path("/markings", name)));
  }
}

Scenario Resolver::run() {
  if (!doc_.is_object()) parse_fail("", "a scenario is a JSON object");
  const Json& version = require(doc_, "version", "");
  if (!version.is_number_integer() || version.get<int>() != kScenarioVersion) {
    parse_fail("/version", "unsupported scenario version");
  }
  s_.id = require_string(doc_, "id", "");
  if (auto t = doc_.find("title"); t != doc_.end() && t->is_string()) s_.title = t->get<std::string>();
  if (auto p = doc_.find("parameters"); p != doc_.end()) {
    if (!p->is_object()) parse_fail("/parameters", "expected an object");
    for (const auto& [name, v] : p->items()) {
      s_.parameters[name] = scalar(v, join_path("/parameters", name));
    }
  }
  parse_timeline();
  parse_named_kets();
  parse_named_matrices();
  parse_bridging();
  parse_states();
  parse_families();
  parse_operators();
  parse_observables();
  parse_checks();
  parse_markings();
  return std::move(s_);
}

}  // namespace

MarkedSystem MarkingScenario::system(const BridgingSet& bridging) const {
  return MarkedSystem(bridging, layout, initial_system, layout.product(initial_registers), schedule);
}

BridgingSet Scenario::bridging() const { return BridgingSet(timeline, bridging_steps); }

const HistoryState& Scenario::state(const std::string& name) const {
  for (const auto& s : states) {
    if (s.name == name) return s.state;
  }
  throw ResolutionError("undefined history state '" + name + "'");
}

const ScenarioFamily& Scenario::family(const std::string& name) const {
  for (const auto& f : families) {
    if (f.name == name) return f;
  }
  throw ResolutionError("undefined family '" + name + "'");
}

const ScenarioOperator& Scenario::op(const std::string& name) const {
  for (const auto& o : operators) {
    if (o.name == name) return o;
  }
  throw ResolutionError("undefined operator '" + name + "'");
}

const ScenarioObservable& Scenario::observable(const std::string& name) const {
  for (const auto& o : observables) {
    if (o.name == name) return o;
  }
  throw ResolutionError("undefined observable '" + name + "'");
}

Family Scenario::build_family(const std::string& name) const {
  const auto& f = family(name);
  std::vector<HistoryState> members;
  for (const auto& m : f.members) members.push_back(state(m));
  return Family(timeline, std::move(members), f.members);
}

Json to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Json to_json(const CKet& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

Json to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Json to_json(const HistoryState& h) {
  Json terms = Json::array();
  for (const auto& t : h.terms()) {
    Json chain = Json::array();
    for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it) chain.push_back(to_json(*it));
    terms.push_back({{"coeff", to_json(t.coeff)}, {"chain", std::move(chain)}});
  }
  return {{"terms", std::move(terms)}};
}

Scenario parse_scenario(const Json& doc) { return Resolver(doc).run(); }

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

Json serialize_scenario(const Scenario& s) {
  Json out;
  out["version"] = kScenarioVersion;
  out["id"] = s.id;
  if (!s.title.empty()) out["title"] = s.title;
  if (!s.parameters.empty()) {
    Json p = Json::object();
    for (const auto& [k, v] : s.parameters) p[k] = to_json(v);
    out["parameters"] = std::move(p);
  }
  Json tl = Json::array();
  for (const auto& slot : s.timeline.slots()) {
    Json j = {{"label", slot.label}, {"dim", slot.dim}};
    if (!slot.subsystems.empty()) j["subsystems"] = slot.subsystems;
    tl.push_back(std::move(j));
  }
  out["timeline"] = std::move(tl);
  if (!s.kets.empty()) {
    Json k = Json::object();
    for (const auto& [name, v] : s.kets) k[name] = to_json(v);
    out["kets"] = std::move(k);
  }
  if (!s.matrices.empty()) {
    Json m = Json::object();
    for (const auto& [name, v] : s.matrices) m[name] = to_json(v);
    out["matrices"] = std::move(m);
  }
  Json br = Json::array();
  for (const auto& step : s.bridging_steps) br.push_back(to_json(step));
  out["bridging"] = std::move(br);
  Json states = Json::object();
  for (const auto& st : s.states) states[st.name] = to_json(st.state);
  out["history_states"] = std::move(states);
  if (!s.families.empty()) {
    Json fams = Json::object();
    for (const auto& f : s.families) {
      Json j = {{"members", f.members}};
      if (!f.variant.empty()) j["variant"] = f.variant;
      if (f.expect_coefficients) {
        Json cs = Json::array();
        for (auto c : *f.expect_coefficients) cs.push_back(to_json(c));
        j["expect_coefficients"] = std::move(cs);
      }
      fams[f.name] = std::move(j);
    }
    out["families"] = std::move(fams);
  }
  if (!s.operators.empty()) {
    Json ops = Json::object();
    for (const auto& o : s.operators) {
      Json fs = Json::array();
      const auto& f = o.op.factors();
      for (auto it = f.rbegin(); it != f.rend(); ++it) fs.push_back(to_json(*it));
      ops[o.name] = {{"factors", std::move(fs)}};
    }
    out["operators"] = std::move(ops);
  }
  if (!s.observables.empty()) {
    Json obs = Json::object();
    for (const auto& o : s.observables) obs[o.name] = {{"family", o.family}, {"values", o.values}};
    out["observables"] = std::move(obs);
  }

  Json checks = Json::object();
  auto put = [&](const char* key, Json arr) {
    if (!arr.empty()) checks[key] = std::move(arr);
  };
  {
    Json a = Json::array();
    for (const auto& c : s.weight_checks) {
      Json j = {{"state", c.state}};
      if (c.expect) j["expect"] = *c.expect;
      if (c.expect_k) j["expect_k"] = to_json(*c.expect_k);
      a.push_back(std::move(j));
    }
    put("weight", std::move(a));
  }
  {
    Json a = Json::array();
    for (const auto& c : s.inner_checks) {
      Json j = {{"left", c.left}, {"right", c.right}};
      if (c.expect) j["expect"] = to_json(*c.expect);
      a.push_back(std::move(j));
    }
    put("inner", std::move(a));
  }
  {
    Json a = Json::array();
    for (const auto& c : s.equivalence_checks) {
      a.push_back({{"left", c.left}, {"right", c.right}, {"expect", c.expect}});
    }
    put("equivalent", std::move(a));
  }
  {
    Json a = Json::array();
    for (const auto& c : s.decompose_checks) {
      Json j = {{"state", c.state}, {"family", c.family}};
      if (c.expect) {
        Json e = Json::array();
        for (auto x : *c.expect) e.push_back(to_json(x));
        j["expect"] = std::move(e);
      }
      a.push_back(std::move(j));
    }
    put("decompose", std::move(a));
  }
  {
    Json a = Json::array();
    for (const auto& c : s.probability_checks) {
      Json j = {{"state", c.state}, {"family", c.family}};
      if (c.expect) j["expect"] = *c.expect;
      a.push_back(std::move(j));
    }
    put("probabilities", std::move(a));
  }
  {
    Json a = Json::array();
    for (const auto& c : s.distribution_checks) {
      Json j = {{"state", c.state}, {"observable", c.observable}};
      if (c.expect) {
        Json e = Json::array();
        for (const auto& [v, p] : *c.expect) e.push_back(Json::array({v, p}));
        j["expect"] = std::move(e);
      }
      a.push_back(std::move(j));
    }
    put("distribution", std::move(a));
  }
  {
    Json a = Json::array();
    for (const auto& c : s.compatibility_checks) {
      Json j = {{"from", c.from}, {"to", c.to}};
      if (c.expect) j["expect"] = *c.expect;
      if (c.expect_transform) j["expect_transform"] = to_json(*c.expect_transform);
      a.push_back(std::move(j));
    }
    put("compatible", std::move(a));
  }
  {
    Json a = Json::array();
    for (const auto& c : s.conditional_checks) {
      Json j = {{"state", c.state},
                {"slot", s.timeline.slot(c.slot).label},
                {"subsystem", c.subsystem},
                {"projector", to_json(c.projector)}};
      if (c.expect) {
        j["expect"] = {{"slot", s.timeline.slot(c.expect->slot).label},
                       {"subsystem", c.expect->subsystem},
                       {"projector", to_json(c.expect->projector)}};
      }
      a.push_back(std::move(j));
    }
    put("conditional", std::move(a));
  }
  {
    Json a = Json::array();
    for (const auto& c : s.eigenhistory_checks) {
      Json j = {{"name", c.name}, {"operators", c.operators}};
      if (!c.expect_members.empty()) j["expect_members"] = c.expect_members;
      if (!c.expect_vectors.empty()) {
        Json vs = Json::array();
        for (const auto& v : c.expect_vectors) vs.push_back(to_json(v));
        j["expect_vectors"] = std::move(vs);
      }
      a.push_back(std::move(j));
    }
    put("eigenhistories", std::move(a));
  }
  if (!checks.empty()) out["checks"] = std::move(checks);

  if (!s.markings.empty()) {
    Json ms = Json::object();
    for (const auto& m : s.markings) {
      Json j;
      j["registers"] = m.layout.dims();
      j["initial_system"] = to_json(m.initial_system);
      Json init = Json::array();
      for (const auto& k : m.initial_registers) init.push_back(to_json(k));
      j["initial_ancilla"] = std::move(init);
      Json sched = Json::array();
      for (const auto& step : m.schedule) {
        Json controls = Json::array();
        for (const auto& c : step.controls()) {
          controls.push_back({{"projector", to_json(c.projector)},
                              {"ancilla", to_json(c.ancilla_op)}});
        }
        sched.push_back({{"slot", s.timeline.slot(step.slot()).label}, {"controls", std::move(controls)}});
      }
      j["schedule"] = std::move(sched);
      if (m.expect_final) j["expect_final"] = to_json(*m.expect_final);
      if (!m.branch_maps.empty()) {
        Json bs = Json::array();
        for (const auto& b : m.branch_maps) bs.push_back({{"family", b.family}, {"expect_valid", b.expect_valid}});
        j["branch_maps"] = std::move(bs);
      }
      auto basis_json = [](const std::vector<CKet>& basis) {
        Json out = Json::array();
        for (const auto& k : basis) out.push_back(to_json(k));
        return out;
      };
      if (!m.measurements.empty()) {
        Json ms2 = Json::array();
        for (const auto& mc : m.measurements) {
          Json x = {{"register", mc.register_index}, {"basis", basis_json(mc.basis)}};
          if (mc.expect) x["expect"] = *mc.expect;
          if (!mc.expect_branches.empty()) x["expect_branches"] = basis_json(mc.expect_branches);
          ms2.push_back(std::move(x));
        }
        j["measurements"] = std::move(ms2);
      }
      if (!m.sequential.empty()) {
        Json qs = Json::array();
        for (const auto& q : m.sequential) {
          Json stages = Json::array();
          for (const auto& st : q.stages) {
            stages.push_back({{"register", st.register_index},
                              {"basis", basis_json(st.basis)},
                              {"family", st.family}});
          }
          Json x = {{"name", q.name}, {"stages", std::move(stages)}};
          if (q.expect_stage1) x["expect_stage1"] = *q.expect_stage1;
          qs.push_back(std::move(x));
        }
        j["sequential"] = std::move(qs);
      }
      ms[m.name] = std::move(j);
    }
    out["markings"] = std::move(ms);
  }
  return out;
}

namespace {

bool close(const CMatrix& a, const CMatrix& b, double tol) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

bool close(const std::optional<CMatrix>& a, const std::optional<CMatrix>& b, double tol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || close(*a, *b, tol);
}

bool close(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol; }

bool same_state(const HistoryState& a, const HistoryState& b, double tol) {
  if (!(a.timeline() == b.timeline()) || a.terms().size() != b.terms().size()) return false;
  for (std::size_t t = 0; t < a.terms().size(); ++t) {
    const auto& x = a.terms()[t];
    const auto& y = b.terms()[t];
    if (!close(x.coeff, y.coeff, tol)) return false;
    for (std::size_t k = 0; k < x.factors.size(); ++k) {
      if (!close(x.factors[k], y.factors[k], tol)) return false;
    }
  }
  return true;
}

}  // namespace

bool equivalent(const Scenario& a, const Scenario& b, double tol) {
  // The resolved forms serialize identically up to number formatting; compare
  // the serializations structurally with a numeric tolerance.
  std::function<bool(const Json&, const Json&)> eq = [&](const Json& x, const Json& y) {
    if (x.is_number() && y.is_number()) return std::abs(x.get<double>() - y.get<double>()) <= tol;
    if (x.type() != y.type()) return false;
    if (x.is_array()) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!eq(x[i], y[i])) return false;
      }
      return true;
    }
    if (x.is_object()) {
      if (x.size() != y.size()) return false;
      for (auto it = x.begin(); it != x.end(); ++it) {
        auto jt = y.find(it.key());
        if (jt == y.end() || !eq(it.value(), *jt)) return false;
      }
      return true;
    }
    return x == y;
  };
  if (a.states.size() != b.states.size()) return false;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    if (a.states[i].name != b.states[i].name || !same_state(a.states[i].state, b.states[i].state, tol)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < std::min(a.weight_checks.size(), b.weight_checks.size()); ++i) {
    if (!close(a.weight_checks[i].expect_k, b.weight_checks[i].expect_k, tol)) return false;
  }
  return eq(serialize_scenario(a), serialize_scenario(b));
}

}  // namespace histstate
