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

#include "histstate/densemath.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

namespace histstate {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix kron_all(const std::vector<CMatrix>& factors) {
  CMatrix out = CMatrix::Ones(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

CMatrix projector(const CKet& v, double tol) {
  if (!is_normalized(v, tol)) {
    std::ostringstream msg;
    msg << "projector needs a unit vector, got norm " << v.norm();
    throw NormalizationError(msg.str());
  }
  return v * v.adjoint();
}

Complex frob_inner(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "frob_inner on " << a.rows() << "x" << a.cols() << " and " << b.rows()
        << "x" << b.cols();
    throw ShapeMismatch(msg.str());
  }
  return (a.conjugate().array() * b.array()).sum();
}

CKet fix_phase(const CKet& v) {
  if (v.size() == 0) return v;
  Eigen::Index best = 0;
  double best_mag = std::abs(v(0));
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    // Ties within rounding noise keep the earlier index.
    if (std::abs(v(i)) > best_mag + 1e-12) {
      best = i;
      best_mag = std::abs(v(i));
    }
  }
  if (best_mag == 0.0) return v;
  const Complex phase = std::conj(v(best)) / best_mag;
  return v * phase;
}

HermitianEigen eig_hermitian(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) throw ShapeMismatch("eig_hermitian needs a square matrix");
  if (!is_hermitian(a, tol)) {
    std::ostringstream msg;
    msg << "‖A - A†‖_F = " << frob_norm(a - a.adjoint());
    throw NotHermitian(msg.str());
  }
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  const auto n = a.rows();
  HermitianEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = n - 1 - k;
    out.values(k) = solver.eigenvalues()(src);
    out.vectors.col(k) = fix_phase(solver.eigenvectors().col(src));
  }
  return out;
}

double frob_norm(const CMatrix& a) { return a.norm(); }

bool all_finite(const CMatrix& a) { return a.allFinite(); }

bool is_hermitian(const CMatrix& a, double tol) {
  return a.rows() == a.cols() && frob_norm(a - a.adjoint()) <= tol;
}

bool is_unitary(const CMatrix& a, double tol) {
  return a.rows() == a.cols() &&
         frob_norm(a.adjoint() * a - CMatrix::Identity(a.cols(), a.cols())) <= tol;
}

bool is_isometry(const CMatrix& a, double tol) {
  if (a.rows() >= a.cols()) {
    return frob_norm(a.adjoint() * a - CMatrix::Identity(a.cols(), a.cols())) <= tol;
  }
  return frob_norm(a * a.adjoint() - CMatrix::Identity(a.rows(), a.rows())) <= tol;
}

bool is_projector(const CMatrix& a, double tol) {
  return is_hermitian(a, tol) && frob_norm(a * a - a) <= tol;
}

bool is_normalized(const CKet& v, double tol) { return std::abs(v.norm() - 1.0) <= tol; }

CMatrix identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return CMatrix::Identity(n, n);
}

CKet basis_ket(std::size_t dim, std::size_t index) {
  CKet v = CKet::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

CMatrix outer(const CKet& a, const CKet& b) { return a * b.adjoint(); }

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

namespace {

CKet qubit(Complex a, Complex b) {
  CKet v(2);
  v << a, b;
  return v;
}

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

NamedRegistry::NamedRegistry() {
  const double r = 1.0 / std::sqrt(2.0);
  kets_["z+"] = qubit(1, 0);
  kets_["z-"] = qubit(0, 1);
  kets_["x+"] = qubit(r, r);
  kets_["x-"] = qubit(r, -r);
  kets_["y+"] = qubit(r, kI * r);
  kets_["y-"] = qubit(r, -kI * r);
  kets_["0"] = qubit(1, 0);
  kets_["1"] = qubit(0, 1);
  kets_["+"] = qubit(r, r);
  kets_["-"] = qubit(r, -r);

  matrices_["I"] = identity(2);
  matrices_["H"] = mat2(r, r, r, -r);
  matrices_["sx"] = mat2(0, 1, 1, 0);
  matrices_["sy"] = mat2(0, -kI, kI, 0);
  matrices_["sz"] = mat2(1, 0, 0, -1);
  matrices_["X"] = matrices_["sx"];
  matrices_["Y"] = matrices_["sy"];
  matrices_["Z"] = matrices_["sz"];
}

const NamedRegistry& NamedRegistry::builtin() {
  static const NamedRegistry registry;
  return registry;
}

bool NamedRegistry::has_ket(const std::string& name) const { return kets_.count(name) > 0; }

bool NamedRegistry::has_matrix(const std::string& name) const {
  static const std::regex identity_pattern(R"(I\(([1-9][0-9]*)\))");
  return matrices_.count(name) > 0 || std::regex_match(name, identity_pattern);
}

const CKet& NamedRegistry::ket(const std::string& name) const {
  auto it = kets_.find(name);
  if (it == kets_.end()) throw ResolutionError("unknown ket '" + name + "'");
  return it->second;
}

CMatrix NamedRegistry::matrix(const std::string& name) const {
  if (auto it = matrices_.find(name); it != matrices_.end()) return it->second;
  static const std::regex identity_pattern(R"(I\(([1-9][0-9]*)\))");
  std::smatch m;
  if (std::regex_match(name, m, identity_pattern)) {
    return identity(std::stoul(m[1].str()));
  }
  throw ResolutionError("unknown matrix '" + name + "'");
}

void NamedRegistry::add_ket(const std::string& name, CKet value) {
  kets_[name] = std::move(value);
}

void NamedRegistry::add_matrix(const std::string& name, CMatrix value) {
  matrices_[name] = std::move(value);
}

const CKet& named_ket(const std::string& name) { return NamedRegistry::builtin().ket(name); }

CMatrix named_matrix(const std::string& name) { return NamedRegistry::builtin().matrix(name); }

}  // namespace histstate
