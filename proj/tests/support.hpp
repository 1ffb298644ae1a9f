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

// Test-only helpers. The oracles here deliberately avoid the library's own
// chain and inner-product code: they multiply matrices out by hand.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "histstate/families.hpp"
#include "histstate/marking.hpp"

namespace testsupport {

using histstate::CKet;
using histstate::CMatrix;
using histstate::Complex;

inline const double kRt2 = std::sqrt(2.0);
inline const Complex kJ{0.0, 1.0};

inline CKet ket(std::initializer_list<Complex> xs) {
  CKet v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (auto x : xs) v(i++) = x;
  return v;
}

inline CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline CMatrix proj(const CKet& v) { return v * v.adjoint(); }

inline CMatrix sx() { return mat2(0, 1, 1, 0); }
inline CMatrix sy() { return mat2(0, -kJ, kJ, 0); }
inline CMatrix sz() { return mat2(1, 0, 0, -1); }
inline CMatrix id(int d) { return CMatrix::Identity(d, d); }

inline CKet zp() { return ket({1, 0}); }
inline CKet zm() { return ket({0, 1}); }
inline CKet xp() { return ket({1 / kRt2, 1 / kRt2}); }
inline CKet xm() { return ket({1 / kRt2, -1 / kRt2}); }
inline CKet yp() { return ket({1 / kRt2, kJ / kRt2}); }
inline CKet ym() { return ket({1 / kRt2, -kJ / kRt2}); }

inline CMatrix kron2(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// F_n T_{n-1} ... T_1 F_1 for factors and steps given in time order.
inline CMatrix chain_product(const std::vector<CMatrix>& factors,
                             const std::vector<CMatrix>& steps) {
  CMatrix m = factors.front();
  for (std::size_t j = 1; j < factors.size(); ++j) m = factors[j] * steps[j - 1] * m;
  return m;
}

struct Term {
  Complex coeff;
  std::vector<CMatrix> factors;
};

inline CMatrix k_oracle(const std::vector<Term>& terms, const std::vector<CMatrix>& steps) {
  CMatrix k = terms.front().coeff * chain_product(terms.front().factors, steps);
  for (std::size_t t = 1; t < terms.size(); ++t) k += terms[t].coeff * chain_product(terms[t].factors, steps);
  return k;
}

inline Complex trace_inner(const CMatrix& a, const CMatrix& b) { return (a.adjoint() * b).trace(); }

inline histstate::HistoryState to_state(const histstate::Timeline& tl, const std::vector<Term>& terms) {
  std::vector<histstate::ChainTerm> out;
  for (const auto& t : terms) out.push_back({t.coeff, t.factors});
  return histstate::HistoryState(tl, std::move(out));
}

// Random generation.

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double normal() { return normal_(rng_); }
  double uniform() { return uniform_(rng_); }
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Complex cnormal() { return {normal(), normal()}; }

  CMatrix matrix(int rows, int cols) {
    CMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = cnormal();
    return m;
  }

  CMatrix hermitian(int d) {
    const CMatrix a = matrix(d, d);
    return (a + a.adjoint()) / 2.0;
  }

  CMatrix unitary(int d) {
    Eigen::HouseholderQR<CMatrix> qr(matrix(d, d));
    return qr.householderQ() * CMatrix::Identity(d, d);
  }

  // First `cols` columns of a random unitary.
  CMatrix isometry(int rows, int cols) { return unitary(rows).leftCols(cols); }

  CKet state(int d) {
    CKet v = matrix(d, 1).col(0);
    return v / v.norm();
  }

  std::vector<CKet> basis(int d) {
    const CMatrix u = unitary(d);
    std::vector<CKet> out;
    for (int k = 0; k < d; ++k) out.push_back(u.col(k));
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

struct RandomSpace {
  histstate::Timeline timeline;
  std::vector<CMatrix> steps;
};

// n slots with non-decreasing dimensions and random isometric bridging.
inline RandomSpace random_space(Gen& g, int max_slots = 4, int max_dim = 3) {
  const int n = g.range(1, max_slots);
  std::vector<histstate::Slot> slots;
  int d = g.range(1, max_dim);
  for (int j = 0; j < n; ++j) {
    if (j > 0 && d < max_dim && g.uniform() < 0.3) ++d;
    slots.push_back({"t" + std::to_string(j + 1), static_cast<std::size_t>(d), {}});
  }
  RandomSpace s{histstate::Timeline(slots), {}};
  for (int j = 0; j + 1 < n; ++j) {
    s.steps.push_back(g.isometry(static_cast<int>(slots[j + 1].dim), static_cast<int>(slots[j].dim)));
  }
  return s;
}

inline std::vector<Term> random_terms(Gen& g, const histstate::Timeline& tl, int max_terms = 3) {
  std::vector<Term> out;
  const int count = g.range(1, max_terms);
  for (int t = 0; t < count; ++t) {
    Term term{g.cnormal(), {}};
    for (std::size_t j = 0; j < tl.size(); ++j) {
      const int d = static_cast<int>(tl.dim(j));
      term.factors.push_back(g.matrix(d, d));
    }
    out.push_back(std::move(term));
  }
  return out;
}

inline CMatrix cyclic_shift(int d, int power) {
  CMatrix s = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) s((k + power) % d, k) = 1.0;
  return s;
}

// An aligned marking instance: the first and last slots are marked in random
// bases, and sometimes a middle slot is marked in the bridged image of the
// first basis. Every marked slot writes its outcome into its own register
// by a cyclic shift. The family is the set of product chains through the
// marked bases, normalized where they have nonzero weight.
struct MarkingInstance {
  histstate::Timeline timeline;
  std::vector<CMatrix> steps;
  histstate::AncillaLayout layout;
  CKet initial_system;
  CKet initial_ancilla;
  std::vector<histstate::MarkingStep> schedule;
  histstate::Family family;
  std::size_t null_members = 0;
};

inline MarkingInstance random_marking(Gen& g) {
  using namespace histstate;
  const int d = g.range(2, 3);
  const int n = g.range(2, 4);
  const Timeline tl = Timeline::uniform(static_cast<std::size_t>(n), static_cast<std::size_t>(d));
  std::vector<CMatrix> steps;
  for (int j = 0; j + 1 < n; ++j) steps.push_back(g.unitary(d));
  const BridgingSet b(tl, steps);

  const auto first = g.basis(d);
  const auto last = g.basis(d);
  int middle = -1;
  if (n > 2 && g.uniform() < 0.5) middle = g.range(1, n - 2);
  std::vector<CKet> mid_basis;
  if (middle > 0) {
    const CMatrix u = b.bridge(0, static_cast<std::size_t>(middle));
    for (const auto& v : first) mid_basis.push_back(u * v);
  }

  std::vector<int> marked = {0};
  if (middle > 0) marked.push_back(middle);
  marked.push_back(n - 1);
  AncillaLayout layout(std::vector<std::size_t>(marked.size(), static_cast<std::size_t>(d)));

  std::vector<MarkingStep> schedule;
  for (std::size_t r = 0; r < marked.size(); ++r) {
    const int slot = marked[r];
    const auto& basis = slot == 0 ? first : (slot == n - 1 ? last : mid_basis);
    std::vector<Control> controls;
    for (int k = 0; k < d; ++k) controls.push_back({proj(basis[k]), layout.embed(r, cyclic_shift(d, k))});
    schedule.emplace_back(static_cast<std::size_t>(slot), std::move(controls));
  }

  std::vector<HistoryState> members;
  std::size_t nulls = 0;
  const int mids = middle > 0 ? d : 1;
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < mids; ++k) {
      for (int j = 0; j < d; ++j) {
        std::vector<CMatrix> f(static_cast<std::size_t>(n), id(d));
        f.front() = proj(first[j]);
        f.back() = proj(last[i]);
        if (middle > 0) f[static_cast<std::size_t>(middle)] = proj(mid_basis[k]);
        HistoryState h = HistoryState::chain(tl, f);
        const double w = weight(h, b);
        if (w > 1e-9) {
          h = normalize(h, b);
        } else {
          ++nulls;
        }
        members.push_back(std::move(h));
      }
    }
  }
  std::vector<CKet> zeros(marked.size(), CKet::Unit(d, 0));
  return {tl,
          steps,
          layout,
          g.state(d),
          layout.product(zeros),
          std::move(schedule),
          Family(tl, std::move(members)),
          nulls};
}

// Any schedule: random slots, projectors from grouped random bases, random
// unitaries on the full ancilla, over random isometric bridging.
inline histstate::MarkedSystem random_marked_system(Gen& g) {
  using namespace histstate;
  auto space = random_space(g, 4, 3);
  std::vector<std::size_t> regs(static_cast<std::size_t>(g.range(1, 2)));
  for (auto& r : regs) r = static_cast<std::size_t>(g.range(2, 3));
  const AncillaLayout layout(regs);
  const int da = static_cast<int>(layout.total_dim());
  std::vector<MarkingStep> schedule;
  for (std::size_t j = 0; j < space.timeline.size(); ++j) {
    if (g.uniform() < 0.4) continue;
    const int d = static_cast<int>(space.timeline.dim(j));
    const auto basis = g.basis(d);
    const int groups = g.range(1, d);
    std::vector<CMatrix> ps(static_cast<std::size_t>(groups), CMatrix::Zero(d, d));
    for (int k = 0; k < d; ++k) ps[static_cast<std::size_t>(k < groups ? k : g.range(0, groups - 1))] += proj(basis[k]);
    std::vector<Control> controls;
    for (auto& p : ps) controls.push_back({p, g.unitary(da)});
    schedule.emplace_back(j, std::move(controls));
  }
  std::vector<CKet> init;
  for (auto r : regs) init.push_back(g.state(static_cast<int>(r)));
  return MarkedSystem(BridgingSet(space.timeline, space.steps), layout,
                      g.state(static_cast<int>(space.timeline.first_dim())), layout.product(init),
                      std::move(schedule));
}

// Mach-Zehnder fixtures, written out by hand.

inline histstate::Timeline mz_timeline() {
  return histstate::Timeline({{"t0", 1, {}}, {"t1", 2, {}}, {"t2", 2, {}}, {"t3", 2, {}}, {"t4", 2, {}}});
}

inline std::vector<CMatrix> mz_steps() {
  CMatrix split(2, 1);
  split << 1 / kRt2, 1 / kRt2;
  const CMatrix h = mat2(1, 1, 1, -1) / kRt2;
  return {split, id(2), h, id(2)};
}

// alpha^1 and alpha^2 with the given overall coefficient (2 as printed,
// sqrt 2 for unit weight). Factors in time order t0..t4.
inline std::vector<histstate::HistoryState> mz_alpha(Complex coeff) {
  const auto tl = mz_timeline();
  const CMatrix one = id(1);
  const CMatrix b = proj(zp());
  const CMatrix c = proj(zm());
  auto chain = [&](const CMatrix& at2, const CMatrix& at4) {
    return histstate::ChainTerm{coeff, {one, id(2), at2, id(2), at4}};
  };
  return {histstate::HistoryState(tl, {chain(b, c), chain(c, b)}),
          histstate::HistoryState(tl, {chain(c, c), chain(b, b)})};
}

// U1 at t2 and U2 at t4, each flipping the register on the c arm.
inline std::vector<histstate::MarkingStep> mz_schedule(const histstate::AncillaLayout& layout,
                                                       const CMatrix& flip) {
  std::vector<histstate::MarkingStep> out;
  for (std::size_t slot : {2u, 4u}) {
    out.emplace_back(slot, std::vector<histstate::Control>{{proj(zp()), id(static_cast<int>(layout.total_dim()))},
                                                           {proj(zm()), flip}});
  }
  return out;
}

}  // namespace testsupport
