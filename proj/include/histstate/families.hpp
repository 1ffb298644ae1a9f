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
#include <optional>
#include <string>
#include <vector>

#include "histstate/histcore.hpp"

namespace histstate {

/// How condition (2), Σ c_i |Y_i) = 1 ⊙ ... ⊙ 1, is checked.
enum class Completeness {
  Exact,     // as an operator identity on H
  Physical,  // only through K images, i.e. modulo the kernel of the seminorm
};

struct FamilyReport {
  CMatrix gram;                       // (Y_i|Y_j)
  std::vector<double> weights;        // diagonal of gram
  double completeness_residual = 0;   // Frobenius distance of the best fit
  std::vector<Complex> coefficients;  // c_i; empty when residual > tol
  std::size_t nonzero_count = 0;      // members of unit weight
  bool passed = false;
  std::vector<std::string> failures;  // one line per failed item
};

/// An ordered list of history states over a common timeline. A family counts
/// as validated only once a passing report has been attached via validate().
class Family {
 public:
  Family(Timeline timeline, std::vector<HistoryState> members,
         std::vector<std::string> names = {});

  const Timeline& timeline() const { return timeline_; }
  const std::vector<HistoryState>& members() const { return members_; }
  const HistoryState& member(std::size_t i) const { return members_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return members_.size(); }

  const std::optional<FamilyReport>& report() const { return report_; }
  bool validated() const { return report_ && report_->passed; }

  // Copy of this family carrying `report`.
  Family with_report(FamilyReport report) const;

 private:
  Timeline timeline_;
  std::vector<HistoryState> members_;
  std::vector<std::string> names_;
  std::optional<FamilyReport> report_;
};

struct ValidateOptions {
  double tol = kDefaultTol;
  Completeness completeness = Completeness::Exact;
};

/// Checks orthogonality, 0/1 weights and completeness. Completeness is a
/// least-squares solve over the flattened operator space of H (or of K images
/// in Physical mode); null members get coefficients from the same solve.
FamilyReport validate_family(const Family& family, const BridgingSet& bridging,
                             const ValidateOptions& options = {});

/// validate_family plus attaching the report.
Family validate(const Family& family, const BridgingSet& bridging,
                const ValidateOptions& options = {});

struct Decomposition {
  std::vector<Complex> coefficients;
  double residual = 0;  // weight of psi - Σ d_i Y_i
};

/// d_i = (Y_i|Ψ) for unit-weight members, 0 for null members.
Decomposition decompose(const HistoryState& psi, const Family& family,
                        const BridgingSet& bridging);

/// Born-rule analog p_i = |(Y_i|Ψ)|². Throws NotNormalized unless the weight
/// of psi is 1 within tol.
std::vector<double> probabilities(const HistoryState& psi, const Family& family,
                                  const BridgingSet& bridging, double tol = kDefaultTol);

/// Number of unit-weight members is at most dim(t_n) · dim(t_1).
bool nonzero_bound_check(const Family& family);

struct Compatibility {
  bool compatible = false;
  CMatrix transform;               // row j: fb_j ≈ Σ_i transform(j, i) fa_i
  std::vector<double> residuals;   // per member of fb, Frobenius norm in K space
};

Compatibility compatible(const Family& fa, const Family& fb, const BridgingSet& bridging,
                         double tol = kDefaultTol);

/// Replaces the factor at `slot` of every chain by (p ⊗ 1) F (p ⊗ 1)†, with p
/// acting on subsystem `subsystem` of the slot, then drops annihilated chains
/// and renormalizes. Throws ZeroWeight if nothing survives.
HistoryState conditional_history(const HistoryState& psi, std::size_t slot,
                                 std::size_t subsystem, const CMatrix& p,
                                 const BridgingSet& bridging, double tol = kDefaultTol);

/// The conditioned state before renormalization (may have zero weight).
HistoryState condition_unnormalized(const HistoryState& psi, std::size_t slot,
                                    std::size_t subsystem, const CMatrix& p,
                                    double tol = kDefaultTol);

}  // namespace histstate
