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
#include <vector>

#include "histstate/families.hpp"

namespace histstate {

/// Product of ancilla registers; register 0 is the leftmost Kronecker factor.
/// The joint space is system ⊗ register_0 ⊗ register_1 ⊗ ...
class AncillaLayout {
 public:
  AncillaLayout() = default;
  explicit AncillaLayout(std::vector<std::size_t> register_dims);

  static AncillaLayout qubits(std::size_t count);

  std::size_t size() const { return dims_.size(); }
  std::size_t dim(std::size_t reg) const { return dims_.at(reg); }
  std::size_t total_dim() const;
  const std::vector<std::size_t>& dims() const { return dims_; }

  // Places a single-register operator on `reg` with identities elsewhere.
  CMatrix embed(std::size_t reg, const CMatrix& op) const;
  // Product ket from one ket per register.
  CKet product(const std::vector<CKet>& kets) const;

  bool operator==(const AncillaLayout&) const = default;

 private:
  std::vector<std::size_t> dims_;
};

struct Control {
  CMatrix projector;   // on the system slot
  CMatrix ancilla_op;  // unitary on the full ancilla space
};

/// Σ_i P_i ⊗ V_i applied right after the system reaches slot `slot`. The
/// constructor rejects control sets that are not an orthogonal resolution of
/// the identity, or whose ancilla operators are not unitary (InvalidStep).
class MarkingStep {
 public:
  MarkingStep(std::size_t slot, std::vector<Control> controls, double tol = kDefaultTol);

  std::size_t slot() const { return slot_; }
  const std::vector<Control>& controls() const { return controls_; }
  CMatrix joint_operator() const;

 private:
  std::size_t slot_;
  std::vector<Control> controls_;
};

/// True when the nonzero operators form an orthogonal resolution of the
/// identity by projectors. This is the structure every admissible marking
/// step has; it is the check applied to a coupling given only by its Kraus
/// operators Σ_a K_a ⊗ |a><anc_0|.
bool is_orthogonal_resolution(const std::vector<CMatrix>& ops, double tol = kDefaultTol);

class MarkedSystem {
 public:
  MarkedSystem(BridgingSet bridging, AncillaLayout ancilla, CKet initial_system,
               CKet initial_ancilla, std::vector<MarkingStep> schedule,
               double tol = kDefaultTol);

  const BridgingSet& bridging() const { return bridging_; }
  const Timeline& timeline() const { return bridging_.timeline(); }
  const AncillaLayout& ancilla() const { return ancilla_; }
  const CKet& initial_system() const { return initial_system_; }
  const CKet& initial_ancilla() const { return initial_ancilla_; }
  const std::vector<MarkingStep>& schedule() const { return schedule_; }

 private:
  BridgingSet bridging_;
  AncillaLayout ancilla_;
  CKet initial_system_;
  CKet initial_ancilla_;
  std::vector<MarkingStep> schedule_;
};

/// Joint system ⊗ ancilla state at t_n.
CKet simulate(const MarkedSystem& m);

/// simulate() as a linear map of the initial system state: a
/// (dim(t_n)·d_anc) x dim(t_1) matrix with the ancilla start fixed.
CMatrix simulate_operator(const MarkedSystem& m);

struct BranchMap {
  std::vector<CKet> labels;        // ancilla label per member (zero for silent members)
  std::vector<CKet> amplitudes;    // c_i K|Y_i) |ψ0>
  std::vector<Complex> coefficients;  // c_i
  std::vector<bool> active;        // unit weight and c_i != 0
  double residual = 0;             // operator-level reconstruction error
  double state_residual = 0;       // error on the simulated final state
  bool labels_orthonormal = false;
  bool valid = false;
};

/// Expresses the marking evolution as Σ_i c_i K|Y_i) ⊗ |m_i>. Labels come from
/// projecting onto the K images of the unit-weight members, which are
/// orthonormal in a valid family, so the solution is the least-squares one.
BranchMap compute_branch_map(const MarkedSystem& m, const Family& family,
                             double tol = kDefaultTol);

/// compute_branch_map that throws Misaligned unless the map is valid.
BranchMap branch_map(const MarkedSystem& m, const Family& family, double tol = kDefaultTol);

struct AncillaOutcome {
  double probability = 0;
  std::optional<CKet> collapsed;  // renormalized; empty for zero-probability outcomes
};

/// Born-rule measurement of one ancilla register in an orthonormal basis. The
/// collapsed state keeps the full joint shape with the register projected.
std::vector<AncillaOutcome> measure_ancilla(const CKet& joint, std::size_t system_dim,
                                            const AncillaLayout& layout, std::size_t reg,
                                            const std::vector<CKet>& basis,
                                            double tol = kDefaultTol);

struct MeasurementPlan {
  std::size_t register_index = 0;
  std::vector<CKet> basis;
  Family family;
};

struct OutcomeNode {
  std::size_t stage = 0;
  std::size_t register_index = 0;
  std::size_t outcome = 0;
  double conditional_probability = 0;
  double joint_probability = 0;
  std::optional<CKet> collapsed;
  // Share of the path amplitude carried by each member of the stage family.
  std::vector<double> member_shares;
  std::optional<std::size_t> assigned_member;  // set when one share is 1
  std::vector<OutcomeNode> children;
};

/// Measures the registers stage by stage. Each stage family must branch-map
/// onto the marking evolution (Misaligned otherwise).
std::vector<OutcomeNode> sequential_measure(const MarkedSystem& m,
                                            const std::vector<MeasurementPlan>& plans,
                                            double tol = kDefaultTol);

}  // namespace histstate
