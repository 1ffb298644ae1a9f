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

#include "histstate/histcore.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace histstate {

namespace {

std::string shape_str(const CMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

bool same_dims(const Timeline& a, const Timeline& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a.dim(j) != b.dim(j)) return false;
  }
  return true;
}

}  // namespace

Timeline::Timeline(std::vector<Slot> slots) : slots_(std::move(slots)) {
  if (slots_.empty()) throw ShapeMismatch("a timeline needs at least one slot");
  for (const auto& s : slots_) {
    if (s.dim == 0) throw ShapeMismatch("slot '" + s.label + "' has dimension 0");
    if (!s.subsystems.empty()) {
      const auto prod = std::accumulate(s.subsystems.begin(), s.subsystems.end(),
                                        std::size_t{1}, std::multiplies<>());
      if (prod != s.dim) {
        throw ShapeMismatch("slot '" + s.label + "' subsystem dims do not multiply to " +
                            std::to_string(s.dim));
      }
    }
  }
}

Timeline Timeline::uniform(std::size_t n, std::size_t dim) {
  std::vector<Slot> slots;
  for (std::size_t j = 0; j < n; ++j) slots.push_back({"t" + std::to_string(j + 1), dim, {}});
  return Timeline(std::move(slots));
}

std::size_t Timeline::history_dim() const {
  std::size_t d = 1;
  for (const auto& s : slots_) d *= s.dim;
  return d;
}

std::size_t Timeline::index_of(const std::string& label) const {
  for (std::size_t j = 0; j < slots_.size(); ++j) {
    if (slots_[j].label == label) return j;
  }
  throw ResolutionError("unknown time slot '" + label + "'");
}

void require_same_timeline(const Timeline& a, const Timeline& b) {
  if (!(a == b)) throw TimelineMismatch("history states live on different timelines");
}

BridgingSet::BridgingSet(const Timeline& timeline, std::vector<CMatrix> steps, double tol)
    : timeline_(timeline), steps_(std::move(steps)) {
  if (steps_.size() + 1 != timeline_.size()) {
    throw ShapeMismatch("expected " + std::to_string(timeline_.size() - 1) +
                        " bridging steps, got " + std::to_string(steps_.size()));
  }
  for (std::size_t j = 0; j < steps_.size(); ++j) {
    const auto& t = steps_[j];
    const auto rows = static_cast<Eigen::Index>(timeline_.dim(j + 1));
    const auto cols = static_cast<Eigen::Index>(timeline_.dim(j));
    if (t.rows() != rows || t.cols() != cols) {
      throw ShapeMismatch("bridging step " + std::to_string(j) + " is " + shape_str(t) +
                          ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!all_finite(t) || !is_isometry(t, tol)) {
      throw ShapeMismatch("bridging step " + std::to_string(j) + " is not unitary/isometric");
    }
  }
}

BridgingSet BridgingSet::trivial(const Timeline& timeline) {
  std::vector<CMatrix> steps;
  for (std::size_t j = 0; j + 1 < timeline.size(); ++j) {
    if (timeline.dim(j) != timeline.dim(j + 1)) {
      throw ShapeMismatch("trivial bridging needs equal slot dimensions");
    }
    steps.push_back(identity(timeline.dim(j)));
  }
  return BridgingSet(timeline, std::move(steps));
}

CMatrix BridgingSet::bridge(std::size_t from, std::size_t to) const {
  if (from > to || to >= timeline_.size()) throw ShapeMismatch("bad bridge range");
  CMatrix out = identity(timeline_.dim(from));
  for (std::size_t j = from; j < to; ++j) out = steps_[j] * out;
  return out;
}

HistoryState::HistoryState(Timeline timeline) : timeline_(std::move(timeline)) {}

HistoryState::HistoryState(Timeline timeline, std::vector<ChainTerm> terms)
    : timeline_(std::move(timeline)), terms_(std::move(terms)) {
  for (const auto& t : terms_) check_term(t);
}

void HistoryState::check_term(const ChainTerm& term) const {
  if (term.factors.size() != timeline_.size()) {
    throw ShapeMismatch("chain has " + std::to_string(term.factors.size()) +
                        " factors for a timeline of " + std::to_string(timeline_.size()));
  }
  for (std::size_t j = 0; j < term.factors.size(); ++j) {
    const auto d = static_cast<Eigen::Index>(timeline_.dim(j));
    const auto& f = term.factors[j];
    if (f.rows() != d || f.cols() != d) {
      throw ShapeMismatch("factor at slot '" + timeline_.slot(j).label + "' is " +
                          shape_str(f) + ", expected " + std::to_string(d) + "x" +
                          std::to_string(d));
    }
  }
}

HistoryState HistoryState::chain(const Timeline& timeline, std::vector<CMatrix> factors,
                                 Complex coeff) {
  return HistoryState(timeline, {ChainTerm{coeff, std::move(factors)}});
}

HistoryState HistoryState::unit(const Timeline& timeline) {
  std::vector<CMatrix> factors;
  for (const auto& s : timeline.slots()) factors.push_back(identity(s.dim));
  return chain(timeline, std::move(factors));
}

CMatrix HistoryState::as_operator() const {
  const auto d = static_cast<Eigen::Index>(timeline_.history_dim());
  CMatrix out = CMatrix::Zero(d, d);
  for (const auto& t : terms_) {
    std::vector<CMatrix> latest_first(t.factors.rbegin(), t.factors.rend());
    out += t.coeff * kron_all(latest_first);
  }
  return out;
}

CMatrix chain_k(const ChainTerm& term, const BridgingSet& bridging) {
  const auto& tl = bridging.timeline();
  if (term.factors.size() != tl.size()) throw ShapeMismatch("chain length differs from timeline");
  for (std::size_t j = 0; j < tl.size(); ++j) {
    const auto d = static_cast<Eigen::Index>(tl.dim(j));
    if (term.factors[j].rows() != d || term.factors[j].cols() != d) {
      throw ShapeMismatch("factor " + std::to_string(j) + " is " + shape_str(term.factors[j]));
    }
  }
  CMatrix out = term.factors[0];
  for (std::size_t j = 1; j < term.factors.size(); ++j) {
    out = term.factors[j] * (bridging.step(j - 1) * out);
  }
  return term.coeff * out;
}

CMatrix k_of(const HistoryState& psi, const BridgingSet& bridging) {
  const auto& tl = bridging.timeline();
  if (!same_dims(psi.timeline(), tl)) {
    throw ShapeMismatch("history state and bridging set disagree on slot dimensions");
  }
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(tl.last_dim()),
                              static_cast<Eigen::Index>(tl.first_dim()));
  for (const auto& term : psi.terms()) out += chain_k(term, bridging);
  return out;
}

Complex inner(const HistoryState& phi, const HistoryState& psi, const BridgingSet& bridging) {
  require_same_timeline(phi.timeline(), psi.timeline());
  return frob_inner(k_of(phi, bridging), k_of(psi, bridging));
}

double weight(const HistoryState& psi, const BridgingSet& bridging) {
  return k_of(psi, bridging).squaredNorm();
}

HistoryState normalize(const HistoryState& psi, const BridgingSet& bridging, double tol) {
  const double w = weight(psi, bridging);
  if (w <= tol) {
    std::ostringstream msg;
    msg << "cannot normalize a history of weight " << w;
    throw ZeroWeight(msg.str());
  }
  return scale(1.0 / std::sqrt(w), psi);
}

bool physically_equal(const HistoryState& phi, const HistoryState& psi,
                      const BridgingSet& bridging, double tol) {
  require_same_timeline(phi.timeline(), psi.timeline());
  return frob_norm(k_of(phi, bridging) - k_of(psi, bridging)) <= tol;
}

HistoryState add(const HistoryState& phi, const HistoryState& psi) {
  require_same_timeline(phi.timeline(), psi.timeline());
  std::vector<ChainTerm> terms = phi.terms();
  terms.insert(terms.end(), psi.terms().begin(), psi.terms().end());
  return HistoryState(phi.timeline(), std::move(terms));
}

HistoryState scale(Complex c, const HistoryState& psi) {
  if (c == Complex{0.0, 0.0}) return HistoryState(psi.timeline());
  std::vector<ChainTerm> terms = psi.terms();
  for (auto& t : terms) t.coeff *= c;
  return HistoryState(psi.timeline(), std::move(terms));
}

HistoryState operator+(const HistoryState& phi, const HistoryState& psi) { return add(phi, psi); }

HistoryState operator-(const HistoryState& phi, const HistoryState& psi) {
  return add(phi, scale(-1.0, psi));
}

HistoryState operator*(Complex c, const HistoryState& psi) { return scale(c, psi); }

HistoryState prune(const HistoryState& psi, double tol) {
  std::vector<ChainTerm> kept;
  for (const auto& t : psi.terms()) {
    if (std::abs(t.coeff) <= tol) continue;
    bool zero_factor = false;
    for (const auto& f : t.factors) zero_factor = zero_factor || frob_norm(f) <= tol;
    if (!zero_factor) kept.push_back(t);
  }
  return HistoryState(psi.timeline(), std::move(kept));
}

CMatrix embed_subsystem(const CMatrix& op, const std::vector<std::size_t>& subsystems,
                        std::size_t index) {
  if (index >= subsystems.size()) throw ShapeMismatch("subsystem index out of range");
  const auto d = static_cast<Eigen::Index>(subsystems[index]);
  if (op.rows() != d || op.cols() != d) {
    throw ShapeMismatch("operator is " + shape_str(op) + " for a subsystem of dimension " +
                        std::to_string(d));
  }
  std::vector<CMatrix> parts;
  for (std::size_t k = 0; k < subsystems.size(); ++k) {
    parts.push_back(k == index ? op : identity(subsystems[k]));
  }
  return kron_all(parts);
}

CMatrix reduced_factor(const CMatrix& factor, const std::vector<std::size_t>& subsystems,
                       std::size_t keep) {
  if (keep >= subsystems.size()) throw ShapeMismatch("subsystem index out of range");
  std::size_t before = 1, after = 1;
  for (std::size_t k = 0; k < keep; ++k) before *= subsystems[k];
  for (std::size_t k = keep + 1; k < subsystems.size(); ++k) after *= subsystems[k];
  const std::size_t dk = subsystems[keep];
  if (static_cast<std::size_t>(factor.rows()) != before * dk * after ||
      factor.rows() != factor.cols()) {
    throw ShapeMismatch("factor shape does not match the subsystem structure");
  }
  const auto idx = [&](std::size_t b, std::size_t k, std::size_t a) {
    return static_cast<Eigen::Index>((b * dk + k) * after + a);
  };
  CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t i = 0; i < dk; ++i) {
    for (std::size_t j = 0; j < dk; ++j) {
      Complex acc = 0.0;
      for (std::size_t b = 0; b < before; ++b) {
        for (std::size_t a = 0; a < after; ++a) acc += factor(idx(b, i, a), idx(b, j, a));
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
    }
  }
  return out;
}

}  // namespace histstate
