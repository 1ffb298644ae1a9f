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
#include <string>
#include <vector>

#include "histstate/densemath.hpp"

namespace histstate {

/// One time slot of a history space. `subsystems` optionally declares a
/// tensor factorization of the slot (e.g. {2, 2} for two spins); when empty
/// the slot is treated as a single system of dimension `dim`.
struct Slot {
  std::string label;
  std::size_t dim = 1;
  std::vector<std::size_t> subsystems;

  bool operator==(const Slot&) const = default;
};

/// Ordered time slots t_1 < ... < t_n.
class Timeline {
 public:
  Timeline() = default;
  explicit Timeline(std::vector<Slot> slots);

  // n slots of equal dimension labelled t1..tn.
  static Timeline uniform(std::size_t n, std::size_t dim);

  std::size_t size() const { return slots_.size(); }
  const Slot& slot(std::size_t j) const { return slots_.at(j); }
  std::size_t dim(std::size_t j) const { return slots_.at(j).dim; }
  const std::vector<Slot>& slots() const { return slots_; }
  std::size_t first_dim() const { return slots_.front().dim; }
  std::size_t last_dim() const { return slots_.back().dim; }
  // Dimension of the history space H = H_{t_n} ⊙ ... ⊙ H_{t_1}.
  std::size_t history_dim() const;
  // Index of the slot with this label; throws ResolutionError if absent.
  std::size_t index_of(const std::string& label) const;

  bool operator==(const Timeline&) const = default;

 private:
  std::vector<Slot> slots_;
};

/// Bridging steps T(t_{j+1}, t_j), each dim(t_{j+1}) x dim(t_j). Steps
/// between slots of different dimension must be isometries; this is how pre-
/// and post-selection are expressed.
class BridgingSet {
 public:
  BridgingSet(const Timeline& timeline, std::vector<CMatrix> steps,
              double tol = kDefaultTol);

  // Identity steps; requires every slot to have the same dimension.
  static BridgingSet trivial(const Timeline& timeline);

  const Timeline& timeline() const { return timeline_; }
  std::size_t size() const { return steps_.size(); }
  const CMatrix& step(std::size_t j) const { return steps_.at(j); }
  const std::vector<CMatrix>& steps() const { return steps_; }

  // T(t_to, t_from) = step(to-1) ... step(from); identity when from == to.
  CMatrix bridge(std::size_t from, std::size_t to) const;

 private:
  Timeline timeline_;
  std::vector<CMatrix> steps_;
};

/// coeff · F_n ⊙ ... ⊙ F_1. Factors are stored in time order, factors[0]
/// acting at t_1.
struct ChainTerm {
  Complex coeff{1.0, 0.0};
  std::vector<CMatrix> factors;
};

/// A complex linear combination of chains over one timeline. No
/// canonicalization is performed: two states with different term lists may
/// still be physically equal (see physically_equal).
class HistoryState {
 public:
  // The zero history state.
  explicit HistoryState(Timeline timeline);
  HistoryState(Timeline timeline, std::vector<ChainTerm> terms);

  // A single chain with coefficient `coeff`; factors in time order.
  static HistoryState chain(const Timeline& timeline, std::vector<CMatrix> factors,
                            Complex coeff = 1.0);
  // 1 ⊙ ... ⊙ 1
  static HistoryState unit(const Timeline& timeline);

  const Timeline& timeline() const { return timeline_; }
  const std::vector<ChainTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Σ coeff · kron(F_n, ..., F_1), the state as an operator on H.
  CMatrix as_operator() const;

 private:
  void check_term(const ChainTerm& term) const;

  Timeline timeline_;
  std::vector<ChainTerm> terms_;
};

/// Chain operator of one term: coeff · F_n T(t_n,t_{n-1}) ... T(t_2,t_1) F_1.
CMatrix chain_k(const ChainTerm& term, const BridgingSet& bridging);

/// K|Ψ) = Σ chain_k(term). The zero state maps to the zero dim(t_n) x dim(t_1)
/// matrix.
CMatrix k_of(const HistoryState& psi, const BridgingSet& bridging);

/// (Φ|Ψ) = Tr[(K|Φ))† K|Ψ)].
Complex inner(const HistoryState& phi, const HistoryState& psi, const BridgingSet& bridging);

double weight(const HistoryState& psi, const BridgingSet& bridging);

/// Ψ / sqrt((Ψ|Ψ)). Throws ZeroWeight when the weight is <= tol.
HistoryState normalize(const HistoryState& psi, const BridgingSet& bridging,
                       double tol = kDefaultTol);

bool physically_equal(const HistoryState& phi, const HistoryState& psi,
                      const BridgingSet& bridging, double tol = kDefaultTol);

HistoryState add(const HistoryState& phi, const HistoryState& psi);
HistoryState scale(Complex c, const HistoryState& psi);

HistoryState operator+(const HistoryState& phi, const HistoryState& psi);
HistoryState operator-(const HistoryState& phi, const HistoryState& psi);
HistoryState operator*(Complex c, const HistoryState& psi);

/// Drops terms with a zero coefficient or a zero factor. The result is
/// physically (and operator-wise) equal to the input.
HistoryState prune(const HistoryState& psi, double tol = kDefaultTol);

/// Partial trace of a slot operator onto one declared subsystem.
CMatrix reduced_factor(const CMatrix& factor, const std::vector<std::size_t>& subsystems,
                       std::size_t keep);

/// kron(1, ..., op, ..., 1) placing `op` on subsystem `index`.
CMatrix embed_subsystem(const CMatrix& op, const std::vector<std::size_t>& subsystems,
                        std::size_t index);

void require_same_timeline(const Timeline& a, const Timeline& b);

}  // namespace histstate
