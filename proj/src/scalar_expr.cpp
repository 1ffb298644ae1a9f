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

#include "histstate/scalar_expr.hpp"

#include <cctype>
#include <cmath>

namespace histstate {

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::map<std::string, Complex>& params)
      : text_(text), params_(params) {}

  Complex parse() {
    Complex v = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("in scalar \"" + std::string(text_) + "\" at " + std::to_string(pos_) +
                     ": " + why);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Complex expr() {
    Complex v = term();
    while (true) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }

  Complex term() {
    Complex v = unary();
    while (true) {
      if (eat('*')) {
        v *= unary();
      } else if (eat('/')) {
        const Complex d = unary();
        if (d == Complex{0.0, 0.0}) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  Complex unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }

  Complex power() {
    Complex base = primary();
    if (eat('^')) {
      const Complex e = unary();
      if (e.imag() == 0.0 && e.real() == std::round(e.real())) {
        return std::pow(base, static_cast<int>(e.real()));
      }
      return std::pow(base, e);
    }
    return base;
  }

  Complex primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end");
    const char c = text_[pos_];
    if (eat('(')) {
      Complex v = expr();
      if (!eat(')')) fail("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::string name = identifier();
      if (eat('(')) {
        Complex arg = expr();
        if (!eat(')')) fail("expected ')'");
        if (name == "sqrt") return std::sqrt(arg);
        if (name == "exp") return std::exp(arg);
        if (name == "conj") return std::conj(arg);
        fail("unknown function '" + name + "'");
      }
      if (name == "i") return {0.0, 1.0};
      if (name == "pi") return {M_PI, 0.0};
      if (auto it = params_.find(name); it != params_.end()) return it->second;
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Complex number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    const std::string lit(text_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      const double v = std::stod(lit, &used);
      if (used != lit.size()) fail("bad number '" + lit + "'");
      return {v, 0.0};
    } catch (const std::logic_error&) {
      fail("bad number '" + lit + "'");
    }
  }

  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  const std::map<std::string, Complex>& params_;
  std::size_t pos_ = 0;
};

}  // namespace

Complex eval_scalar(std::string_view text, const std::map<std::string, Complex>& params) {
  return Parser(text, params).parse();
}

}  // namespace histstate
