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

#include "histstate/marking.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace histstate {

AncillaLayout::AncillaLayout(std::vector<std::size_t> register_dims)
    : dims_(std::move(register_dims)) {
  for (auto d : dims_) {
    if (d == 0) throw ShapeMismatch("ancilla register of dimension 0");
  }
}

AncillaLayout AncillaLayout::qubits(std::size_t count) {
  return AncillaLayout(std::vector<std::size_t>(count, 2));
}

std::size_t AncillaLayout::total_dim() const {
  return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
}

CMatrix AncillaLayout::embed(std::size_t reg, const CMatrix& op) const {
  if (reg >= dims_.size()) throw ShapeMismatch("ancilla register index out of range");
  return embed_subsystem(op, dims_, reg);
}

CKet AncillaLayout::product(const std::vector<CKet>& kets) const {
  if (kets.size() != dims_.size()) throw ShapeMismatch("one ket per ancilla register expected");
  CMatrix out = CMatrix::Ones(1, 1);
  for (std::size_t r = 0; r < kets.size(); ++r) {
    if (static_cast<std::size_t>(kets[r].size()) != dims_[r]) {
      throw ShapeMismatch("ancilla ket " + std::to_string(r) + " has the wrong dimension");
    }
    out = kron(out, kets[r]);
  }
  return out.col(0);
}

bool is_orthogonal_resolution(const std::vector<CMatrix>& ops, double tol) {
  std::vector<const CMatrix*> live;
  for (const auto& op : ops) {
    if (frob_norm(op) > tol) live.push_back(&op);
  }
  if (live.empty()) return false;
  const auto d = live.front()->rows();
  CMatrix sum = CMatrix::Zero(d, d);
  for (std::size_t i = 0; i < live.size(); ++i) {
    const CMatrix& p = *live[i];
    if (p.rows() != d || p.cols() != d || !is_projector(p, tol)) return false;
    for (std::size_t j = i + 1; j < live.size(); ++j) {
      if (frob_norm(p * *live[j]) > tol) return false;
    }
    sum += p;
  }
  return frob_norm(sum - CMatrix::Identity(d, d)) <= tol;
}

MarkingStep::MarkingStep(std::size_t slot, std::vector<Control> controls, double tol)
    : slot_(slot), controls_(std::move(controls)) {
  if (controls_.empty()) throw InvalidStep("marking step without controls");
  const auto ds = controls_.front().projector.rows();
  const auto da = controls_.front().ancilla_op.rows();
  std::vector<CMatrix> projectors;
  for (const auto& c : controls_) {
    if (c.projector.rows() != ds || c.projector.cols() != ds) {
      throw InvalidStep("control projectors differ in shape");
    }
    if (c.ancilla_op.rows() != da || c.ancilla_op.cols() != da) {
      throw InvalidStep("ancilla operators differ in shape");
    }
    if (!is_unitary(c.ancilla_op, tol)) throw InvalidStep("ancilla operator is not unitary");
    projectors.push_back(c.projector);
  }
  for (const auto& p : projectors) {
    if (!is_projector(p, tol)) throw InvalidStep("control is not an orthogonal projector");
  }
  if (!is_orthogonal_resolution(projectors, tol)) {
    throw InvalidStep(
        "controls are not an orthogonal resolution of the identity; such a coupling imposes "
        "extra orthogonality on the system");
  }
}

CMatrix MarkingStep::joint_operator() const {
  const auto ds = controls_.front().projector.rows();
  const auto da = controls_.front().ancilla_op.rows();
  CMatrix out = CMatrix::Zero(ds * da, ds * da);
  for (const auto& c : controls_) out += kron(c.projector, c.ancilla_op);
  return out;
}

MarkedSystem::MarkedSystem(BridgingSet bridging, AncillaLayout ancilla, CKet initial_system,
                           CKet initial_ancilla, std::vector<MarkingStep> schedule, double tol)
    : bridging_(std::move(bridging)),
      ancilla_(std::move(ancilla)),
      initial_system_(std::move(initial_system)),
      initial_ancilla_(std::move(initial_ancilla)),
      schedule_(std::move(schedule)) {
  const auto& tl = bridging_.timeline();
  if (static_cast<std::size_t>(initial_system_.size()) != tl.first_dim()) {
    throw ShapeMismatch("initial system ket does not match the first slot");
  }
  if (static_cast<std::size_t>(initial_ancilla_.size()) != ancilla_.total_dim()) {
    throw ShapeMismatch("initial ancilla ket does not match the register layout");
  }
  if (!is_normalized(initial_system_, tol) || !is_normalized(initial_ancilla_, tol)) {
    throw NormalizationError("initial kets must be normalized");
  }
  for (std::size_t k = 0; k < schedule_.size(); ++k) {
    const auto& step = schedule_[k];
    if (step.slot() >= tl.size()) throw InvalidStep("marking step after the last slot");
    if (k > 0 && step.slot() <= schedule_[k - 1].slot()) {
      throw InvalidStep("marking steps must be time-ordered, at most one per slot");
    }
    const auto& c = step.controls().front();
    if (static_cast<std::size_t>(c.projector.rows()) != tl.dim(step.slot())) {
      throw InvalidStep("control projectors do not match slot '" + tl.slot(step.slot()).label + "'");
    }
    if (static_cast<std::size_t>(c.ancilla_op.rows()) != ancilla_.total_dim()) {
      throw InvalidStep("ancilla operator does not match the register layout");
    }
  }
}

CMatrix simulate_operator(const MarkedSystem& m) {
  const auto& tl = m.timeline();
  const auto da = static_cast<Eigen::Index>(m.ancilla().total_dim());
  const CMatrix anc_id = CMatrix::Identity(da, da);
  CMatrix state = kron(identity(tl.first_dim()), m.initial_ancilla());
  auto next = m.schedule().begin();
  auto apply_marking = [&](std::size_t slot) {
    if (next != m.schedule().end() && next->slot() == slot) {
      state = next->joint_operator() * state;
      ++next;
    }
  };
  apply_marking(0);
  for (std::size_t j = 1; j < tl.size(); ++j) {
    state = kron(m.bridging().step(j - 1), anc_id) * state;
    apply_marking(j);
  }
  return state;
}

CKet simulate(const MarkedSystem& m) { return simulate_operator(m) * m.initial_system(); }

BranchMap compute_branch_map(const MarkedSystem& m, const Family& family, double tol) {
  if (!family.validated()) throw FamilyNotValidated("branch_map needs a validated family");
  require_same_timeline(family.timeline(), m.timeline());
  const auto& b = m.bridging();
  const auto& report = *family.report();
  const CMatrix w = simulate_operator(m);
  const auto dn = static_cast<Eigen::Index>(m.timeline().last_dim());
  const auto d1 = static_cast<Eigen::Index>(m.timeline().first_dim());
  const auto da = static_cast<Eigen::Index>(m.ancilla().total_dim());

  // w_slices[a] is the dn x d1 system operator attached to ancilla basis state a.
  std::vector<CMatrix> w_slices(static_cast<std::size_t>(da), CMatrix::Zero(dn, d1));
  for (Eigen::Index s = 0; s < dn; ++s) {
    for (Eigen::Index a = 0; a < da; ++a) w_slices[a].row(s) = w.row(s * da + a);
  }

  BranchMap out;
  CMatrix rebuilt = CMatrix::Zero(w.rows(), w.cols());
  CKet final_rebuilt = CKet::Zero(dn * da);
  for (std::size_t i = 0; i < family.size(); ++i) {
    const CMatrix k = k_of(family.member(i), b);
    const Complex c = report.coefficients.at(i);
    const bool active = std::abs(report.weights[i] - 1.0) <= tol && std::abs(c) > tol;
    CKet label = CKet::Zero(da);
    if (active) {
      for (Eigen::Index a = 0; a < da; ++a) label(a) = frob_inner(k, w_slices[a]) / c;
    }
    const CMatrix branch_op = c * k;
    rebuilt += kron(branch_op, label);
    const CKet amp = branch_op * m.initial_system();
    final_rebuilt += kron(amp, label).col(0);
    out.labels.push_back(label);
    out.amplitudes.push_back(amp);
    out.coefficients.push_back(c);
    out.active.push_back(active);
  }
  out.residual = frob_norm(w - rebuilt);
  out.state_residual = (simulate(m) - final_rebuilt).norm();

  out.labels_orthonormal = true;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (!out.active[i]) continue;
    for (std::size_t j = i; j < family.size(); ++j) {
      if (!out.active[j]) continue;
      const Complex g = out.labels[i].dot(out.labels[j]);
      const double expect = i == j ? 1.0 : 0.0;
      if (std::abs(g - expect) > tol) out.labels_orthonormal = false;
    }
  }
  out.valid = out.labels_orthonormal && out.residual <= tol;
  return out;
}

BranchMap branch_map(const MarkedSystem& m, const Family& family, double tol) {
  BranchMap map = compute_branch_map(m, family, tol);
  if (!map.valid) {
    std::ostringstream msg;
    msg << "schedule does not mark this family (residual " << map.residual
        << (map.labels_orthonormal ? "" : ", labels not orthonormal") << ")";
    throw Misaligned(msg.str());
  }
  return map;
}

namespace {

void require_orthonormal_basis(const std::vector<CKet>& basis, std::size_t dim, double tol) {
  if (basis.size() != dim) {
    throw BasisNotOrthonormal("basis has " + std::to_string(basis.size()) +
                              " vectors for a register of dimension " + std::to_string(dim));
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (static_cast<std::size_t>(basis[i].size()) != dim) {
      throw BasisNotOrthonormal("basis vector " + std::to_string(i) + " has the wrong dimension");
    }
    for (std::size_t j = i; j < basis.size(); ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      if (std::abs(basis[i].dot(basis[j]) - expect) > tol) {
        throw BasisNotOrthonormal("basis vectors " + std::to_string(i) + " and " +
                                  std::to_string(j) + " are not orthonormal");
      }
    }
  }
}

CMatrix register_projector(const AncillaLayout& layout, std::size_t reg, const CKet& e) {
  return layout.embed(reg, e * e.adjoint());
}

}  // namespace

std::vector<AncillaOutcome> measure_ancilla(const CKet& joint, std::size_t system_dim,
                                            const AncillaLayout& layout, std::size_t reg,
                                            const std::vector<CKet>& basis, double tol) {
  if (reg >= layout.size()) throw ShapeMismatch("ancilla register index out of range");
  if (static_cast<std::size_t>(joint.size()) != system_dim * layout.total_dim()) {
    throw ShapeMismatch("joint state does not match system ⊗ ancilla");
  }
  require_orthonormal_basis(basis, layout.dim(reg), tol);
  std::vector<AncillaOutcome> out;
  for (const auto& e : basis) {
    const CMatrix proj = kron(identity(system_dim), register_projector(layout, reg, e));
    const CKet v = proj * joint;
    AncillaOutcome o;
    const double p = v.squaredNorm();
    if (p > tol) {
      o.probability = p;
      o.collapsed = v / std::sqrt(p);
    }
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

struct StageContext {
  const MarkedSystem& system;
  const std::vector<MeasurementPlan>& plans;
  const std::vector<BranchMap>& maps;
  std::size_t system_dim;
  double tol;
};

std::vector<OutcomeNode> expand(const StageContext& ctx, std::size_t stage, const CKet& state,
                                double joint_so_far, const CMatrix& path_projector) {
  const auto& plan = ctx.plans[stage];
  const auto& layout = ctx.system.ancilla();
  const auto outcomes =
      measure_ancilla(state, ctx.system_dim, layout, plan.register_index, plan.basis, ctx.tol);
  const auto& map = ctx.maps[stage];
  std::vector<OutcomeNode> nodes;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    OutcomeNode node;
    node.stage = stage;
    node.register_index = plan.register_index;
    node.outcome = k;
    node.conditional_probability = outcomes[k].probability;
    node.joint_probability = joint_so_far * outcomes[k].probability;
    node.collapsed = outcomes[k].collapsed;
    const CMatrix proj =
        register_projector(layout, plan.register_index, plan.basis[k]) * path_projector;

    double total = 0;
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
      const double s = map.amplitudes[i].squaredNorm() * (proj * map.labels[i]).squaredNorm();
      node.member_shares.push_back(s);
      total += s;
    }
    for (auto& s : node.member_shares) s = total > ctx.tol ? s / total : 0.0;
    for (std::size_t i = 0; i < node.member_shares.size(); ++i) {
      if (node.member_shares[i] >= 1.0 - ctx.tol) node.assigned_member = i;
    }

    if (node.collapsed && stage + 1 < ctx.plans.size()) {
      node.children = expand(ctx, stage + 1, *node.collapsed, node.joint_probability, proj);
    }
    nodes.push_back(std::move(node));
  }
  return nodes;
}

}  // namespace

std::vector<OutcomeNode> sequential_measure(const MarkedSystem& m,
                                            const std::vector<MeasurementPlan>& plans,
                                            double tol) {
  if (plans.empty()) return {};
  std::vector<BranchMap> maps;
  for (std::size_t s = 0; s < plans.size(); ++s) {
    if (plans[s].register_index >= m.ancilla().size()) {
      throw ShapeMismatch("plan " + std::to_string(s) + " names a missing register");
    }
    try {
      maps.push_back(branch_map(m, plans[s].family, tol));
    } catch (const Misaligned& e) {
      throw Misaligned("stage " + std::to_string(s) + ": " + e.detail());
    }
  }
  const auto da = static_cast<Eigen::Index>(m.ancilla().total_dim());
  StageContext ctx{m, plans, maps, m.timeline().last_dim(), tol};
  return expand(ctx, 0, simulate(m), 1.0, CMatrix::Identity(da, da));
}

}  // namespace histstate
