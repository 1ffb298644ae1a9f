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

#include "histstate/families.hpp"

#include <cmath>
#include <sstream>

namespace histstate {

namespace {

Eigen::Map<const CKet> flat(const CMatrix& m) { return {m.data(), m.size()}; }

std::string member_name(const Family& f, std::size_t i) {
  if (i < f.names().size()) return f.names()[i];
  return "Y" + std::to_string(i + 1);
}

bool unit_weight(double w, double tol) { return std::abs(w - 1.0) <= tol; }

std::vector<CMatrix> k_images(const Family& f, const BridgingSet& b) {
  std::vector<CMatrix> out;
  out.reserve(f.size());
  for (const auto& m : f.members()) out.push_back(k_of(m, b));
  return out;
}

// Columns are the flattened inputs.
CMatrix stack_columns(const std::vector<CMatrix>& mats) {
  const auto rows = mats.empty() ? 0 : mats.front().size();
  CMatrix a(rows, static_cast<Eigen::Index>(mats.size()));
  for (std::size_t i = 0; i < mats.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = flat(mats[i]);
  return a;
}

void require_validated(const Family& f, const char* op) {
  if (!f.validated()) {
    throw FamilyNotValidated(std::string(op) + " needs a family with a passing validation report");
  }
}

}  // namespace

Family::Family(Timeline timeline, std::vector<HistoryState> members,
               std::vector<std::string> names)
    : timeline_(std::move(timeline)), members_(std::move(members)), names_(std::move(names)) {
  for (const auto& m : members_) require_same_timeline(timeline_, m.timeline());
  if (!names_.empty() && names_.size() != members_.size()) {
    throw ShapeMismatch("family has " + std::to_string(members_.size()) + " members but " +
                        std::to_string(names_.size()) + " names");
  }
  if (names_.empty()) {
    for (std::size_t i = 0; i < members_.size(); ++i) names_.push_back("Y" + std::to_string(i + 1));
  }
}

Family Family::with_report(FamilyReport report) const {
  Family out = *this;
  out.report_ = std::move(report);
  return out;
}

FamilyReport validate_family(const Family& family, const BridgingSet& bridging,
                             const ValidateOptions& options) {
  if (family.size() == 0) throw FamilyInvalid("a family needs at least one member");
  require_same_timeline(family.timeline(), bridging.timeline());
  const double tol = options.tol;

  FamilyReport rep;
  const auto ks = k_images(family, bridging);
  const auto n = static_cast<Eigen::Index>(family.size());
  rep.gram.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      rep.gram(i, j) = frob_inner(ks[i], ks[j]);
      rep.gram(j, i) = std::conj(rep.gram(i, j));
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(rep.gram(i, j)) > tol) {
        std::ostringstream msg;
        msg << "orthogonality: (" << member_name(family, i) << "|" << member_name(family, j)
            << ") has modulus " << std::abs(rep.gram(i, j));
        rep.failures.push_back(msg.str());
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = rep.gram(i, i).real();
    rep.weights.push_back(w);
    if (unit_weight(w, tol)) {
      ++rep.nonzero_count;
    } else if (std::abs(w) > tol) {
      std::ostringstream msg;
      msg << "weight: " << member_name(family, i) << " has weight " << w << ", expected 0 or 1";
      rep.failures.push_back(msg.str());
    }
  }

  CMatrix a;
  CMatrix target;
  if (options.completeness == Completeness::Exact) {
    std::vector<CMatrix> ops;
    for (const auto& m : family.members()) ops.push_back(m.as_operator());
    a = stack_columns(ops);
    target = identity(family.timeline().history_dim());
  } else {
    a = stack_columns(ks);
    target = bridging.bridge(0, bridging.timeline().size() - 1);
  }
  const CKet rhs = flat(target);
  const CKet c = a.completeOrthogonalDecomposition().solve(rhs);
  rep.completeness_residual = (a * c - rhs).norm();
  if (rep.completeness_residual <= tol) {
    rep.coefficients.assign(c.data(), c.data() + c.size());
  } else {
    std::ostringstream msg;
    msg << "completeness: best fit of the unit history leaves residual "
        << rep.completeness_residual;
    rep.failures.push_back(msg.str());
  }

  rep.passed = rep.failures.empty();
  return rep;
}

Family validate(const Family& family, const BridgingSet& bridging, const ValidateOptions& options) {
  return family.with_report(validate_family(family, bridging, options));
}

Decomposition decompose(const HistoryState& psi, const Family& family,
                        const BridgingSet& bridging) {
  require_validated(family, "decompose");
  require_same_timeline(family.timeline(), psi.timeline());
  const auto& weights = family.report()->weights;
  const CMatrix kpsi = k_of(psi, bridging);
  CMatrix rest = kpsi;
  Decomposition out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    Complex d = 0.0;
    if (unit_weight(weights[i], 0.5)) {
      const CMatrix ki = k_of(family.member(i), bridging);
      d = frob_inner(ki, kpsi);
      rest -= d * ki;
    }
    out.coefficients.push_back(d);
  }
  out.residual = rest.squaredNorm();
  return out;
}

std::vector<double> probabilities(const HistoryState& psi, const Family& family,
                                  const BridgingSet& bridging, double tol) {
  require_validated(family, "probabilities");
  const double w = weight(psi, bridging);
  if (std::abs(w - 1.0) > tol) {
    std::ostringstream msg;
    msg << "history state has weight " << w;
    throw NotNormalized(msg.str());
  }
  const auto d = decompose(psi, family, bridging);
  std::vector<double> out;
  for (const auto& c : d.coefficients) out.push_back(std::norm(c));
  return out;
}

bool nonzero_bound_check(const Family& family) {
  require_validated(family, "nonzero_bound_check");
  const auto& tl = family.timeline();
  return family.report()->nonzero_count <= tl.last_dim() * tl.first_dim();
}

Compatibility compatible(const Family& fa, const Family& fb, const BridgingSet& bridging,
                         double tol) {
  require_validated(fa, "compatible");
  require_validated(fb, "compatible");
  require_same_timeline(fa.timeline(), fb.timeline());
  const CMatrix a = stack_columns(k_images(fa, bridging));
  const auto solver = a.completeOrthogonalDecomposition();
  Compatibility out;
  out.transform.resize(static_cast<Eigen::Index>(fb.size()), static_cast<Eigen::Index>(fa.size()));
  out.compatible = true;
  for (std::size_t j = 0; j < fb.size(); ++j) {
    const CMatrix kb = k_of(fb.member(j), bridging);
    const CKet rhs = flat(kb);
    const CKet x = solver.solve(rhs);
    out.transform.row(static_cast<Eigen::Index>(j)) = x.transpose();
    const double r = (a * x - rhs).norm();
    out.residuals.push_back(r);
    out.compatible = out.compatible && r <= tol;
  }
  return out;
}

HistoryState condition_unnormalized(const HistoryState& psi, std::size_t slot,
                                    std::size_t subsystem, const CMatrix& p, double tol) {
  const auto& tl = psi.timeline();
  if (slot >= tl.size()) throw ShapeMismatch("slot index out of range");
  const auto& subs = tl.slot(slot).subsystems;
  CMatrix e;
  if (subs.empty()) {
    if (subsystem != 0) {
      throw ShapeMismatch("slot '" + tl.slot(slot).label + "' declares no subsystems");
    }
    e = p;
    if (static_cast<std::size_t>(p.rows()) != tl.dim(slot) || p.rows() != p.cols()) {
      throw ShapeMismatch("projector does not match the slot dimension");
    }
  } else {
    e = embed_subsystem(p, subs, subsystem);
  }
  std::vector<ChainTerm> terms = psi.terms();
  for (auto& t : terms) t.factors[slot] = e * t.factors[slot] * e.adjoint();
  return prune(HistoryState(tl, std::move(terms)), tol);
}

HistoryState conditional_history(const HistoryState& psi, std::size_t slot,
                                 std::size_t subsystem, const CMatrix& p,
                                 const BridgingSet& bridging, double tol) {
  return normalize(condition_unnormalized(psi, slot, subsystem, p, tol), bridging, tol);
}

}  // namespace histstate
