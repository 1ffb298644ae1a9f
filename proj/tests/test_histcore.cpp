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
#include "histstate/histcore.hpp"
#include "support.hpp"

using namespace histstate;
using namespace testsupport;

namespace {

const Timeline kSpin3 = Timeline::uniform(3, 2);

HistoryState product(std::vector<CMatrix> factors, Complex c = 1.0) {
  return HistoryState::chain(kSpin3, std::move(factors), c);
}

}  // namespace

TEST_CASE("k_of_suppressed_chain") {
  const auto b = BridgingSet::trivial(kSpin3);
  // [z-] at t3, [x+] at t2, [z+] at t1.
  const auto h = product({proj(zp()), proj(xp()), proj(zm())});
  const CMatrix k = k_of(h, b);
  const CMatrix expected = 0.5 * zm() * zp().adjoint();
  CHECK((k - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(weight(h, b) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("timeline_basics") {
  const Timeline tl({{"a", 1, {}}, {"b", 4, {2, 2}}, {"c", 3, {}}});
  CHECK(tl.size() == 3);
  CHECK(tl.history_dim() == 12);
  CHECK(tl.first_dim() == 1);
  CHECK(tl.last_dim() == 3);
  CHECK(tl.index_of("b") == 1);
  CHECK_THROWS_AS(tl.index_of("d"), ResolutionError);
  CHECK_THROWS_AS(Timeline({{"a", 4, {3, 2}}}), ShapeMismatch);
}

TEST_CASE("bridging_requires_isometries") {
  const Timeline tl({{"a", 1, {}}, {"b", 2, {}}});
  CMatrix good(2, 1);
  good << 0.6, 0.8;
  CHECK_NOTHROW(BridgingSet(tl, {good}));
  CHECK_THROWS_AS(BridgingSet(tl, {CMatrix(2, 1).setOnes()}), ShapeMismatch);
  CHECK_THROWS_AS(BridgingSet(tl, {good.adjoint()}), ShapeMismatch);
  CHECK_THROWS_AS(BridgingSet(tl, {}), ShapeMismatch);
}

TEST_CASE("bridge_composes_steps") {
  Gen g(3);
  const Timeline tl = Timeline::uniform(4, 2);
  const std::vector<CMatrix> steps = {g.unitary(2), g.unitary(2), g.unitary(2)};
  const BridgingSet b(tl, steps);
  CHECK((b.bridge(0, 3) - steps[2] * steps[1] * steps[0]).norm() < 1e-12);
  CHECK((b.bridge(1, 1) - id(2)).norm() == 0.0);
}

TEST_CASE("chain_shape_is_checked") {
  CHECK_THROWS_AS(HistoryState::chain(kSpin3, {id(2), id(2)}), ShapeMismatch);
  CHECK_THROWS_AS(HistoryState::chain(kSpin3, {id(2), id(3), id(2)}), ShapeMismatch);
}

TEST_CASE("inner_across_timelines_is_rejected") {
  const auto a = HistoryState::unit(kSpin3);
  const auto b = HistoryState::unit(Timeline::uniform(2, 2));
  CHECK_THROWS_AS(inner(a, b, BridgingSet::trivial(kSpin3)), TimelineMismatch);
}

TEST_CASE("normalize_and_zero_weight") {
  const auto b = BridgingSet::trivial(kSpin3);
  // Inconsistent under trivial bridging: z+ then z-.
  const auto null = product({proj(zp()), id(2), proj(zm())});
  CHECK(weight(null, b) < 1e-30);
  CHECK_THROWS_AS(normalize(null, b), ZeroWeight);
  const auto h = product({proj(zp()), proj(xp()), proj(zm())});
  CHECK(weight(normalize(h, b), b) == doctest::Approx(1.0));
}

TEST_CASE("arithmetic_and_physical_equality") {
  const auto b = BridgingSet::trivial(kSpin3);
  const auto up = product({proj(zp()), id(2), id(2)});
  const auto down = product({proj(zm()), id(2), id(2)});
  CHECK(physically_equal(up + down, HistoryState::unit(kSpin3), b));
  CHECK(physically_equal(HistoryState::unit(kSpin3) - down, up, b));
  CHECK(scale(0.0, up).empty());
  CHECK(std::abs(inner(Complex(0, 2) * up, up, b) - Complex(0, -2)) < 1e-14);
  // Different chains, same K image.
  const auto via_middle = product({proj(zp()), proj(zp()), id(2)});
  CHECK(physically_equal(up, via_middle, b));
  CHECK_FALSE(physically_equal(up, down, b));
}

TEST_CASE("prune_drops_zero_terms") {
  const auto h = HistoryState(kSpin3, {{1.0, {id(2), id(2), id(2)}}, {0.0, {id(2), id(2), id(2)}},
                                        {1.0, {id(2), CMatrix::Zero(2, 2), id(2)}}});
  CHECK(prune(h).terms().size() == 1);
}

TEST_CASE("as_operator_orders_latest_slot_leftmost") {
  const Timeline tl = Timeline::uniform(2, 2);
  const auto h = HistoryState::chain(tl, {proj(zp()), proj(zm())});
  CHECK((h.as_operator() - kron2(proj(zm()), proj(zp()))).norm() == 0.0);
}

TEST_CASE("subsystem_embed_and_reduce") {
  const std::vector<std::size_t> subs = {2, 2};
  const CMatrix e0 = embed_subsystem(proj(zp()), subs, 0);
  const CMatrix e1 = embed_subsystem(proj(zp()), subs, 1);
  CHECK((e0 - kron2(proj(zp()), id(2))).norm() == 0.0);
  CHECK((e1 - kron2(id(2), proj(zp()))).norm() == 0.0);
  const CMatrix f = kron2(proj(xp()), sz());
  CHECK((reduced_factor(f, subs, 0) - 0.0 * proj(xp())).norm() < 1e-15);
  CHECK((reduced_factor(f, subs, 1) - sz()).norm() < 1e-15);
  CHECK_THROWS_AS(embed_subsystem(id(3), subs, 0), ShapeMismatch);
}
