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

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "histstate/marking.hpp"
#include "support.hpp"

using namespace histstate;
using namespace testsupport;

TEST_CASE("gram_matrices_are_positive_semidefinite") {
  Gen g(101);
  for (int trial = 0; trial < 200; ++trial) {
    const auto space = random_space(g);
    const BridgingSet b(space.timeline, space.steps);
    const int count = g.range(2, 6);
    std::vector<HistoryState> states;
    for (int k = 0; k < count; ++k) states.push_back(to_state(space.timeline, random_terms(g, space.timeline)));
    CMatrix gram(count, count);
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < count; ++j) gram(i, j) = inner(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(j)], b);
    }
    CHECK((gram - gram.adjoint()).norm() <= 1e-9 * (1 + gram.norm()));
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9 * (1 + gram.norm()));
  }
}

TEST_CASE("k_is_linear_and_matches_the_oracle") {
  Gen g(102);
  for (int trial = 0; trial < 200; ++trial) {
    const auto space = random_space(g);
    const BridgingSet b(space.timeline, space.steps);
    const auto ta = random_terms(g, space.timeline);
    const auto tb = random_terms(g, space.timeline);
    const Complex a = g.cnormal(), c = g.cnormal();
    const auto phi = to_state(space.timeline, ta);
    const auto psi = to_state(space.timeline, tb);
    const CMatrix kphi = k_oracle(ta, space.steps);
    const CMatrix kpsi = k_oracle(tb, space.steps);
    const double scale = 1 + kphi.norm() + kpsi.norm();
    CHECK((k_of(phi, b) - kphi).norm() <= 1e-10 * scale);
    CHECK((k_of(a * phi + c * psi, b) - (a * kphi + c * kpsi)).norm() <= 1e-10 * scale * (std::abs(a) + std::abs(c)));
    // The inner product is the trace pairing of the K images.
    CHECK(std::abs(inner(phi, psi, b) - trace_inner(kphi, kpsi)) <= 1e-9 * scale * scale);
  }
}

TEST_CASE("inner_product_is_conjugate_symmetric_and_weight_nonnegative") {
  Gen g(103);
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = random_space(g);
    const BridgingSet b(space.timeline, space.steps);
    const auto phi = to_state(space.timeline, random_terms(g, space.timeline));
    const auto psi = to_state(space.timeline, random_terms(g, space.timeline));
    const Complex ab = inner(phi, psi, b);
    const Complex ba = inner(psi, phi, b);
    CHECK(std::abs(ab - std::conj(ba)) <= 1e-9 * (1 + std::abs(ab)));
    CHECK(weight(phi, b) >= 0.0);
    if (weight(phi, b) > 1e-6) CHECK(weight(normalize(phi, b), b) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("branch_theorem_on_random_aligned_markings") {
  Gen g(104);
  int with_nulls = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = random_marking(g);
    const BridgingSet b(inst.timeline, inst.steps);
    const Family f = validate(inst.family, b);
    const MarkedSystem m(b, inst.layout, inst.initial_system, inst.initial_ancilla, inst.schedule);
    const auto bm = branch_map(m, f);
    CHECK(bm.valid);
    CHECK(bm.residual <= 1e-9);
    CHECK(bm.state_residual <= 1e-9);
    // Independent reassembly of the final state from the branches.
    CKet rebuilt = CKet::Zero(static_cast<Eigen::Index>(inst.timeline.last_dim() * inst.layout.total_dim()));
    for (std::size_t i = 0; i < f.size(); ++i) rebuilt += kron2(bm.amplitudes[i], bm.labels[i]);
    const CKet final_state = simulate(m);
    CHECK((rebuilt - final_state).norm() <= 1e-9);
    // Branch probabilities are the Born weights of the family.
    for (std::size_t i = 0; i < f.size(); ++i) {
      const CKet expect = f.report()->coefficients[i] * k_of(f.member(i), b) * inst.initial_system;
      CHECK((bm.amplitudes[i] - expect).norm() <= 1e-9);
    }
    with_nulls += inst.null_members > 0 ? 1 : 0;
  }
  // The generator exercises families with null members.
  CHECK(with_nulls > 0);
}

TEST_CASE("simulate_preserves_norm_on_every_generated_schedule") {
  Gen g(105);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = random_marked_system(g);
    const CKet out = simulate(m);
    CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(is_isometry(simulate_operator(m), 1e-9));
  }
  Gen h(106);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inst = random_marking(h);
    const MarkedSystem m(BridgingSet(inst.timeline, inst.steps), inst.layout, inst.initial_system,
                         inst.initial_ancilla, inst.schedule);
    CHECK(simulate(m).norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
}
