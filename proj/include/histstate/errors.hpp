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

#include <stdexcept>
#include <string>
#include <string_view>

namespace histstate {

enum class ErrorKind {
  ShapeMismatch,
  NormalizationError,
  NotHermitian,
  TimelineMismatch,
  ZeroWeight,
  FamilyNotValidated,
  NotNormalized,
  NonCommuting,
  FamilyInvalid,
  InvalidStep,
  Misaligned,
  BasisNotOrthonormal,
  ParseError,
  ResolutionError,
  ShapeError,
};

std::string_view to_string(ErrorKind kind);

/// Base class of every error raised by the library. The kind is also encoded
/// in the dynamic type, so callers can catch either `Error` or a specific
/// alias such as `ZeroWeight`.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

template <ErrorKind K>
class KindError : public Error {
 public:
  explicit KindError(const std::string& what) : Error(K, what) {}
};

using ShapeMismatch = KindError<ErrorKind::ShapeMismatch>;
using NormalizationError = KindError<ErrorKind::NormalizationError>;
using NotHermitian = KindError<ErrorKind::NotHermitian>;
using TimelineMismatch = KindError<ErrorKind::TimelineMismatch>;
using ZeroWeight = KindError<ErrorKind::ZeroWeight>;
using FamilyNotValidated = KindError<ErrorKind::FamilyNotValidated>;
using NotNormalized = KindError<ErrorKind::NotNormalized>;
using NonCommuting = KindError<ErrorKind::NonCommuting>;
using FamilyInvalid = KindError<ErrorKind::FamilyInvalid>;
using InvalidStep = KindError<ErrorKind::InvalidStep>;
using Misaligned = KindError<ErrorKind::Misaligned>;
using BasisNotOrthonormal = KindError<ErrorKind::BasisNotOrthonormal>;
using ParseError = KindError<ErrorKind::ParseError>;
using ResolutionError = KindError<ErrorKind::ResolutionError>;
using ShapeError = KindError<ErrorKind::ShapeError>;

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NormalizationError: return "NormalizationError";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::TimelineMismatch: return "TimelineMismatch";
    case ErrorKind::ZeroWeight: return "ZeroWeight";
    case ErrorKind::FamilyNotValidated: return "FamilyNotValidated";
    case ErrorKind::NotNormalized: return "NotNormalized";
    case ErrorKind::NonCommuting: return "NonCommuting";
    case ErrorKind::FamilyInvalid: return "FamilyInvalid";
    case ErrorKind::InvalidStep: return "InvalidStep";
    case ErrorKind::Misaligned: return "Misaligned";
    case ErrorKind::BasisNotOrthonormal: return "BasisNotOrthonormal";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ResolutionError: return "ResolutionError";
    case ErrorKind::ShapeError: return "ShapeError";
  }
  return "Error";
}

}  // namespace histstate
