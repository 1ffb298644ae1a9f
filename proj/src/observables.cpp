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

#include "histstate/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace histstate {

ProductHistoryOperator::ProductHistoryOperator(const Timeline& timeline) : timeline_(timeline) {
  for (const auto& s : timeline.slots()) factors_.push_back(identity(s.dim));
}

ProductHistoryOperator::ProductHistoryOperator(const Timeline& timeline,
                                               std::vector<CMatrix> factors)
    : timeline_(timeline), factors_(std::move(factors)) {
  if (factors_.size() != timeline_.size()) {
    throw ShapeMismatch("operator has " + std::to_string(factors_.size()) +
                        " factors for a timeline of " + std::to_string(timeline_.size()));
  }
  for (std::size_t j = 0; j < factors_.size(); ++j) {
    const auto d = static_cast<Eigen::Index>(timeline_.dim(j));
    if (factors_[j].rows() != d || factors_[j].cols() != d) {
      throw ShapeMismatch("operator factor at slot '" + timeline_.slot(j).label +
                          "' has the wrong shape");
    }
  }
}

bool ProductHistoryOperator::hermitian(double tol) const {
  return std::all_of(factors_.begin(), factors_.end(),
                     [tol](const CMatrix& f) { return is_hermitian(f, tol); });
}

HistoryState conj_apply(const ProductHistoryOperator& op, const HistoryState& psi) {
  require_same_timeline(op.timeline(), psi.timeline());
  std::vector<ChainTerm> terms = psi.terms();
  for (auto& t : terms) {
    for (std::size_t j = 0; j < t.factors.size(); ++j) {
      t.factors[j] = op.factors()[j] * t.factors[j] * op.factors()[j].adjoint();
    }
  }
  return HistoryState(psi.timeline(), std::move(terms));
}

HistoryState conj_apply(const WeightedOperatorSum& op, const HistoryState& psi) {
  HistoryState out(psi.timeline());
  for (const auto& [w, part] : op.parts) out = out + scale(w, conj_apply(part, psi));
  return out;
}

CMatrix as_matrix(const ProductHistoryOperator& op) {
  const auto& f = op.factors();
  return kron_all(std::vector<CMatrix>(f.rbegin(), f.rend()));
}

HistoryState outer_history(const Timeline& timeline, const CKet& psi) {
  const std::size_t d = timeline.history_dim();
  if (static_cast<std::size_t>(psi.size()) != d) {
    throw ShapeMismatch("vector of size " + std::to_string(psi.size()) +
                        " on a history space of dimension " + std::to_string(d));
  }
  const std::size_t n = timeline.size();
  // Mixed-radix digits of a history index; digit n-1 (slot t_n) is most
  // significant because t_n is the leftmost Kronecker factor.
  auto digits = [&](std::size_t index) {
    std::vector<std::size_t> out(n);
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = index % timeline.dim(j);
      index /= timeline.dim(j);
    }
    return out;
  };
  std::vector<ChainTerm> terms;
  terms.reserve(d * d);
  for (std::size_t row = 0; row < d; ++row) {
    const auto a = digits(row);
    for (std::size_t col = 0; col < d; ++col) {
      const auto b = digits(col);
      ChainTerm t;
      t.coeff = psi(static_cast<Eigen::Index>(row)) * std::conj(psi(static_cast<Eigen::Index>(col)));
      for (std::size_t j = 0; j < n; ++j) {
        t.factors.push_back(outer(basis_ket(timeline.dim(j), a[j]), basis_ket(timeline.dim(j), b[j])));
      }
      terms.push_back(std::move(t));
    }
  }
  return HistoryState(timeline, std::move(terms));
}

namespace {

// Columns of q span an invariant block; split it by the spectrum of each
// refiner restricted to the block.
void refine_block(const CMatrix& q, const std::vector<const CMatrix*>& refiners, std::size_t next,
                  double cluster_tol, std::vector<CKet>& out) {
  if (q.cols() == 1 || next == refiners.size()) {
    for (Eigen::Index k = 0; k < q.cols(); ++k) out.push_back(q.col(k));
    return;
  }
  const CMatrix& m = *refiners[next];
  CMatrix restricted = q.adjoint() * m * q;
  restricted = 0.5 * (restricted + restricted.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(restricted);
  const CMatrix rotated = q * solver.eigenvectors();
  const auto& vals = solver.eigenvalues();
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= vals.size(); ++k) {
    if (k == vals.size() || std::abs(vals(k) - vals(k - 1)) > cluster_tol) {
      refine_block(rotated.middleCols(start, k - start), refiners, next + 1, cluster_tol, out);
      start = k;
    }
  }
}

}  // namespace

SimultaneousEigen simultaneous_eigenbasis(const std::vector<CMatrix>& mats,
                                          const std::vector<CMatrix>& tie_breakers,
                                          std::uint64_t seed, double tol) {
  if (mats.empty()) throw ShapeMismatch("need at least one matrix");
  const auto d = mats.front().rows();
  for (const auto& m : mats) {
    if (m.rows() != d || m.cols() != d) throw ShapeMismatch("matrices differ in shape");
    if (!is_hermitian(m, tol)) throw NotHermitian("operator is not hermitian");
  }
  for (std::size_t a = 0; a < mats.size(); ++a) {
    for (std::size_t b = a + 1; b < mats.size(); ++b) {
      const double c = frob_norm(commutator(mats[a], mats[b]));
      if (c > tol) {
        std::ostringstream msg;
        msg << "operators " << a << " and " << b << " have commutator norm " << c;
        throw NonCommuting(msg.str());
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(0.5, 1.5);
  CMatrix combo = CMatrix::Zero(d, d);
  double scale = 0.0;
  for (const auto& m : mats) {
    combo += coef(rng) * m;
    scale = std::max(scale, m.cwiseAbs().maxCoeff());
  }
  const double cluster_tol = 1e-8 * std::max(1.0, scale);

  std::vector<const CMatrix*> refiners;
  for (const auto& m : mats) refiners.push_back(&m);
  for (const auto& m : tie_breakers) refiners.push_back(&m);

  const auto first = eig_hermitian(combo, tol * std::max(1.0, scale));
  std::vector<CKet> vecs;
  Eigen::Index start = 0;
  for (Eigen::Index k = 1; k <= d; ++k) {
    if (k == d || std::abs(first.values(k) - first.values(k - 1)) > cluster_tol) {
      refine_block(first.vectors.middleCols(start, k - start), refiners, 0, cluster_tol, vecs);
      start = k;
    }
  }

  SimultaneousEigen out;
  std::vector<std::vector<double>> values;
  for (auto& v : vecs) {
    v = fix_phase(v / v.norm());
    std::vector<double> lambdas;
    for (const auto& m : mats) {
      const double lambda = v.dot(m * v).real();
      if ((m * v - lambda * v).norm() > std::sqrt(tol)) {
        throw NonCommuting("no common eigenbasis found within tolerance");
      }
      lambdas.push_back(lambda);
    }
    values.push_back(std::move(lambdas));
  }

  std::vector<std::size_t> order(vecs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t k = 0; k < mats.size(); ++k) {
      if (std::abs(values[a][k] - values[b][k]) > cluster_tol) return values[a][k] > values[b][k];
    }
    return false;
  });
  for (auto i : order) {
    out.vectors.push_back(vecs[i]);
    out.values.push_back(values[i]);
  }
  return out;
}

ObservableFamily observable_family(const std::vector<ProductHistoryOperator>& ops,
                                   const BridgingSet& bridging, std::uint64_t seed,
                                   const ValidateOptions& options) {
  if (ops.empty()) throw ShapeMismatch("observable_family needs at least one operator");
  const Timeline& tl = ops.front().timeline();
  require_same_timeline(tl, bridging.timeline());
  std::vector<CMatrix> mats;
  for (const auto& op : ops) {
    require_same_timeline(tl, op.timeline());
    if (!op.hermitian(options.tol)) throw NotHermitian("history operator has a non-hermitian factor");
    mats.push_back(as_matrix(op));
  }

  // Per-slot factors commute with their own product operator, so they split
  // degenerate eigenspaces into product-form vectors where possible.
  std::vector<CMatrix> ties;
  for (const auto& op : ops) {
    for (std::size_t j = tl.size(); j-- > 0;) {
      std::vector<CMatrix> parts;
      for (std::size_t k = tl.size(); k-- > 0;) {
        parts.push_back(k == j ? op.factors()[k] : identity(tl.dim(k)));
      }
      ties.push_back(kron_all(parts));
    }
  }
  RVector ramp(static_cast<Eigen::Index>(tl.history_dim()));
  for (Eigen::Index i = 0; i < ramp.size(); ++i) ramp(i) = static_cast<double>(i);
  ties.push_back(ramp.cast<Complex>().asDiagonal());

  auto eig = simultaneous_eigenbasis(mats, ties, seed, options.tol);

  std::vector<HistoryState> members;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < eig.vectors.size(); ++i) {
    HistoryState h = outer_history(tl, eig.vectors[i]);
    // Null eigenhistories stay in the family unnormalized.
    if (weight(h, bridging) > options.tol) h = normalize(h, bridging, options.tol);
    members.push_back(std::move(h));
    names.push_back("Psi" + std::to_string(i + 1));
  }
  Family fam = validate(Family(tl, std::move(members), std::move(names)), bridging, options);
  if (!fam.validated()) {
    std::string msg = "eigenhistories do not form a family:";
    for (const auto& f : fam.report()->failures) msg += " " + f + ";";
    throw FamilyInvalid(msg);
  }
  return {std::move(fam), std::move(eig.vectors), std::move(eig.values)};
}

SpectralObservable::SpectralObservable(Family family, std::vector<double> values)
    : family_(std::move(family)), values_(std::move(values)) {
  if (!family_.validated()) throw FamilyNotValidated("spectral observable over an unvalidated family");
  if (values_.size() != family_.size()) {
    throw ShapeMismatch("observable has " + std::to_string(values_.size()) + " values for " +
                        std::to_string(family_.size()) + " members");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ShapeMismatch("observable values must be finite");
  }
}

std::vector<std::pair<double, double>> measure_distribution(const HistoryState& psi,
                                                            const SpectralObservable& obs,
                                                            const BridgingSet& bridging,
                                                            double tol) {
  const auto probs = probabilities(psi, obs.family(), bridging, tol);
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return obs.values()[a] < obs.values()[b]; });
  std::vector<std::pair<double, double>> out;
  for (auto i : order) {
    const double v = obs.values()[i];
    if (!out.empty() && std::abs(out.back().first - v) <= tol) {
      out.back().second += probs[i];
    } else {
      out.emplace_back(v, probs[i]);
    }
  }
  return out;
}

}  // namespace histstate
