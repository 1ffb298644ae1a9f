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

#include <map>
#include <string>
#include <string_view>

#include "histstate/densemath.hpp"

namespace histstate {

/// Evaluates a complex scalar written as text, e.g. "1/sqrt(2)",
/// "-i/sqrt(3)", "alpha/sqrt(2)". Supports + - * / ^, parentheses, decimal
/// literals, the constants i and pi, the functions sqrt, exp, conj, and
/// caller-supplied named parameters. Throws ParseError on malformed input.
Complex eval_scalar(std::string_view text, const std::map<std::string, Complex>& params = {});

}  // namespace histstate
