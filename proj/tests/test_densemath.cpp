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

#include "doctest.h"
#include "histstate/densemath.hpp"
#include "support.hpp"

using namespace histstate;
using namespace testsupport;

TEST_CASE("kron_of_paulis_by_hand") {
  const CMatrix k = kron(sx(), sz());
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(0, 2) = 1;
  expected(1, 3) = -1;
  expected(2, 0) = 1;
  expected(3, 1) = -1;
  CHECK((k - expected).norm() == 0.0);
}

TEST_CASE("kron_all_puts_first_factor_leftmost") {
  const CMatrix k = kron_all({proj(zm()), proj(zp()), id(1)});
  CHECK(k.rows() == 4);
  CHECK(std::abs(k(2, 2) - 1.0) == 0.0);
  CHECK(std::abs(k.sum() - 1.0) == 0.0);
  const CMatrix empty = kron_all({});
  CHECK(empty.rows() == 1);
  CHECK(std::abs(empty(0, 0) - 1.0) == 0.0);
}

TEST_CASE("projector_rejects_unnormalized") {
  CHECK_THROWS_AS(projector(ket({1, 1})), NormalizationError);
  const CMatrix p = projector(xp());
  CHECK(is_projector(p));
  CHECK((p - CMatrix::Constant(2, 2, 0.5)).norm() < 1e-15);
}

TEST_CASE("frob_inner_conjugates_the_left_argument") {
  CMatrix a(1, 2), b(1, 2);
  a << kJ, 1;
  b << 1, 2;
  CHECK(std::abs(frob_inner(a, b) - Complex(2, -1)) < 1e-15);
  CHECK_THROWS_AS(frob_inner(id(2), id(3)), ShapeMismatch);
}

TEST_CASE("eig_hermitian_of_sigma_y") {
  const auto e = eig_hermitian(sy());
  CHECK(e.values(0) == doctest::Approx(1.0));
  CHECK(e.values(1) == doctest::Approx(-1.0));
  CHECK(std::abs(std::abs(e.vectors.col(0).dot(yp())) - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(e.vectors.col(1).dot(ym())) - 1.0) < 1e-12);
  CHECK_THROWS_AS(eig_hermitian(mat2(0, 1, 0, 0)), NotHermitian);
}

TEST_CASE("fix_phase_makes_largest_entry_real_positive") {
  const CKet v = fix_phase(ket({0.6 * kJ, -0.8 * kJ}));
  CHECK(std::abs(v(1) - 0.8) < 1e-15);
  CHECK(std::abs(v(0) + 0.6) < 1e-15);
  // Ties go to the lower index.
  const CKet w = fix_phase(ket({-kJ / kRt2, 1 / kRt2}));
  CHECK(std::abs(w(0) - 1 / kRt2) < 1e-15);
}

TEST_CASE("predicates") {
  CHECK(is_hermitian(sx()));
  CHECK_FALSE(is_hermitian(mat2(0, 1, 0, 0)));
  CHECK(is_unitary(mat2(1, 1, 1, -1) / kRt2));
  CHECK_FALSE(is_unitary(2.0 * id(2)));
  CMatrix col(2, 1);
  col << 1 / kRt2, 1 / kRt2;
  CHECK(is_isometry(col));
  CHECK(is_isometry(col.adjoint()));
  CHECK_FALSE(is_isometry(2.0 * col));
  CHECK(is_normalized(yp()));
  CHECK_FALSE(all_finite(mat2(0, NAN, 0, 0)));
  CHECK(frob_norm(id(3)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(frob_norm(commutator(sx(), sy()) - 2.0 * kJ * sz()) < 1e-15);
}

TEST_CASE("builtin_names") {
  CHECK((named_ket("x-") - xm()).norm() < 1e-15);
  CHECK((named_ket("y+") - yp()).norm() < 1e-15);
  CHECK((named_matrix("sy") - sy()).norm() == 0.0);
  CHECK((named_matrix("I(3)") - id(3)).norm() == 0.0);
  CHECK((named_matrix("H") - mat2(1, 1, 1, -1) / kRt2).norm() < 1e-15);
  CHECK_FALSE(NamedRegistry::builtin().has_matrix("Hh"));
  NamedRegistry r;
  r.add_ket("up", zp());
  CHECK(r.has_ket("up"));
  CHECK(basis_ket(3, 2)(2) == Complex(1.0));
}

TEST_CASE("kron_associativity_and_mixed_product") {
  Gen g(11);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix a = g.matrix(g.range(1, 3), g.range(1, 3));
    const CMatrix b = g.matrix(g.range(1, 3), g.range(1, 3));
    const CMatrix c = g.matrix(g.range(1, 3), g.range(1, 3));
    CHECK((kron(kron(a, b), c) - kron(a, kron(b, c))).norm() < 1e-12);
    CHECK((kron(a, b) - kron2(a, b)).norm() < 1e-12);
    const CMatrix a2 = g.matrix(static_cast<int>(a.cols()), 2);
    const CMatrix b2 = g.matrix(static_cast<int>(b.cols()), 2);
    CHECK((kron(a, b) * kron(a2, b2) - kron(a * a2, b * b2)).norm() < 1e-10);
  }
}

TEST_CASE("eig_hermitian_reconstructs") {
  Gen g(12);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix h = g.hermitian(g.range(1, 6));
    const auto e = eig_hermitian(h);
    const CMatrix rebuilt = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    CHECK((rebuilt - h).norm() < 1e-10);
    CHECK(is_unitary(e.vectors, 1e-10));
    for (Eigen::Index i = 1; i < e.values.size(); ++i) CHECK(e.values(i - 1) >= e.values(i));
  }
}
