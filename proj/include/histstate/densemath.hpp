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

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "histstate/errors.hpp"

namespace histstate {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CKet = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Structural tolerance used when a caller does not supply one.
inline constexpr double kDefaultTol = 1e-10;

inline const Complex kI{0.0, 1.0};

// Kronecker product. In a history space the latest time slot is the leftmost
// (slowest varying) factor, so kron(F_n, kron(..., F_1)) is the matrix of
// F_n ⊙ ... ⊙ F_1 on H.
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Kronecker product of a list, leftmost factor first. Empty list gives [[1]].
CMatrix kron_all(const std::vector<CMatrix>& factors);

/// Rank-one projector |v><v|. Throws NormalizationError unless |‖v‖ - 1| <= tol.
CMatrix projector(const CKet& v, double tol = kDefaultTol);

/// Trace pairing Tr[a† b]. Throws ShapeMismatch on differing shapes.
Complex frob_inner(const CMatrix& a, const CMatrix& b);

struct HermitianEigen {
  RVector values;   // descending
  CMatrix vectors;  // column i pairs with values[i]
};

/// Eigendecomposition of a hermitian matrix. Eigenvalues are returned in
/// descending order; each eigenvector is phase-fixed so that its
/// largest-magnitude component is real and positive.
HermitianEigen eig_hermitian(const CMatrix& a, double tol = kDefaultTol);

/// Multiplies v by the phase that makes its largest-magnitude entry real
/// positive. Ties resolve to the lowest index.
CKet fix_phase(const CKet& v);

double frob_norm(const CMatrix& a);
bool all_finite(const CMatrix& a);
bool is_hermitian(const CMatrix& a, double tol = kDefaultTol);
bool is_unitary(const CMatrix& a, double tol = kDefaultTol);
// T†T = 1 when T is tall, TT† = 1 when T is wide.
bool is_isometry(const CMatrix& a, double tol = kDefaultTol);
bool is_projector(const CMatrix& a, double tol = kDefaultTol);
bool is_normalized(const CKet& v, double tol = kDefaultTol);

CMatrix identity(std::size_t dim);
CKet basis_ket(std::size_t dim, std::size_t index);

// |a><b|
CMatrix outer(const CKet& a, const CKet& b);

CMatrix commutator(const CMatrix& a, const CMatrix& b);

/// Named kets and gates shared by the scenario loader and the tests.
///
/// Built-in kets: z+, z-, x+, x-, y+, y-, 0, 1, +, - (qubit). Built-in
/// matrices: I (2x2), H, sx, sy, sz, X, Y, Z. `I(d)` resolves to the d x d
/// identity for any d >= 1.
class NamedRegistry {
 public:
  NamedRegistry();

  static const NamedRegistry& builtin();

  bool has_ket(const std::string& name) const;
  bool has_matrix(const std::string& name) const;
  const CKet& ket(const std::string& name) const;
  CMatrix matrix(const std::string& name) const;

  void add_ket(const std::string& name, CKet value);
  void add_matrix(const std::string& name, CMatrix value);

  const std::map<std::string, CKet>& kets() const { return kets_; }
  const std::map<std::string, CMatrix>& matrices() const { return matrices_; }

 private:
  std::map<std::string, CKet> kets_;
  std::map<std::string, CMatrix> matrices_;
};

// Shortcuts for the builtin registry.
const CKet& named_ket(const std::string& name);
CMatrix named_matrix(const std::string& name);

}  // namespace histstate
