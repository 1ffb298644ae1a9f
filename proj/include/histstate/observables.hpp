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
#include <utility>
#include <vector>

#include "histstate/families.hpp"

namespace histstate {

/// A_n ⊙ ... ⊙ A_1 acting on history states by conjugation of each factor.
/// Factors are stored in time order, factors[0] acting at t_1.
class ProductHistoryOperator {
 public:
  explicit ProductHistoryOperator(const Timeline& timeline);  // all identities
  ProductHistoryOperator(const Timeline& timeline, std::vector<CMatrix> factors);

  const Timeline& timeline() const { return timeline_; }
  const std::vector<CMatrix>& factors() const { return factors_; }
  bool hermitian(double tol = kDefaultTol) const;

 private:
  Timeline timeline_;
  std::vector<CMatrix> factors_;
};

/// Σ_k w_k (A_k conjugation): the general linear history operator built from
/// weighted product chains.
struct WeightedOperatorSum {
  std::vector<std::pair<Complex, ProductHistoryOperator>> parts;
};

/// F_j ↦ A_j F_j A_j† on every chain.
HistoryState conj_apply(const ProductHistoryOperator& op, const HistoryState& psi);
HistoryState conj_apply(const WeightedOperatorSum& op, const HistoryState& psi);

/// kron(A_n, ..., A_1), the operator on H.
CMatrix as_matrix(const ProductHistoryOperator& op);

/// |ψ><ψ| for a vector on H, expanded into elementary chains
/// ⊙_j |a_j><b_j| over the computational product basis (d² terms).
HistoryState outer_history(const Timeline& timeline, const CKet& psi);

struct ObservableFamily {
  Family family;                               // validated eigenhistories
  std::vector<CKet> eigenvectors;              // |Ψ_i> on H
  std::vector<std::vector<double>> eigenvalues;  // eigenvalues[i][k] of op k
};

struct SimultaneousEigen {
  std::vector<CKet> vectors;
  std::vector<std::vector<double>> values;
};

/// Orthonormal simultaneous eigenbasis of pairwise commuting hermitian
/// matrices. A seeded random real combination is diagonalized first; each
/// degenerate block is then refined by every input matrix in turn and finally
/// by deterministic tie-breakers. Vectors are ordered by their eigenvalue
/// tuples (descending, lexicographic).
SimultaneousEigen simultaneous_eigenbasis(const std::vector<CMatrix>& mats,
                                          const std::vector<CMatrix>& tie_breakers,
                                          std::uint64_t seed, double tol = kDefaultTol);

/// Eigenhistory family of commuting hermitian product operators. Throws
/// NotHermitian, NonCommuting, or FamilyInvalid when the eigenhistories do not
/// form a family (the operator set is then not an observable).
ObservableFamily observable_family(const std::vector<ProductHistoryOperator>& ops,
                                   const BridgingSet& bridging, std::uint64_t seed = 7,
                                   const ValidateOptions& options = {});

/// B = Σ b_i |Y_i)(Y_i| over a validated family.
class SpectralObservable {
 public:
  SpectralObservable(Family family, std::vector<double> values);

  const Family& family() const { return family_; }
  const std::vector<double>& values() const { return values_; }

 private:
  Family family_;
  std::vector<double> values_;
};

/// Probability of each distinct value, degenerate values summed. Values within
/// tol of each other are grouped; output sorted by value.
std::vector<std::pair<double, double>> measure_distribution(const HistoryState& psi,
                                                            const SpectralObservable& obs,
                                                            const BridgingSet& bridging,
                                                            double tol = kDefaultTol);

}  // namespace histstate
