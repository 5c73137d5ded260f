// Copyright 2026 The sdelab Authors
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

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdelab {

/// How indicator boundaries resolve when x sits exactly on one.
///
/// `Exact` keeps the literal open-interval semantics (boundary excluded);
/// `Left` and `Right` return the one-sided limit from that direction.
enum class Side { Left, Right, Exact };

enum class ParseErrorKind {
  EmptyInput,
  UnbalancedParens,
  UnknownIdentifier,
  IndicatorBoundsInvalid,
  InfinityOutsideIndicator,
  InvalidNumber,
  InvalidSignArgument,
  UnexpectedToken,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, std::string expected);

  ParseErrorKind kind() const { return kind_; }
  /// Byte offset into the source where the error was detected.
  std::size_t offset() const { return offset_; }
  /// Hint describing what the parser expected at `offset`.
  const std::string& expected() const { return expected_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
  std::string expected_;
};

enum class EvalErrorKind {
  DivisionByZero,
  DomainError,
  /// Intermediate floating-point overflow produced NaN (e.g. inf - inf).
  Overflow,
};

class EvalError : public std::runtime_error {
 public:
  EvalError(EvalErrorKind kind, const std::string& what);
  EvalErrorKind kind() const { return kind_; }

 private:
  EvalErrorKind kind_;
};

enum class NodeKind { Constant, Variable, Negate, Add, Sub, Mul, Div, Pow, Call, Indicator };

enum class Function { Abs, Exp, Sin, Cos, Sqrt, Sign };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;  // Constant
  double lo = 0.0;     // Indicator lower bound (may be -inf)
  double hi = 0.0;     // Indicator upper bound (may be +inf)
  Function function = Function::Abs;
  ExprNodePtr lhs;  // operand of unary nodes and calls
  ExprNodePtr rhs;
};

/// Immutable parsed scalar function of `x`.
///
/// Copies share the underlying tree; evaluation never mutates it, so one
/// instance can be evaluated from many threads.
class ExprAst {
 public:
  explicit ExprAst(ExprNodePtr root);

  const ExprNode& root() const { return *root_; }

  friend bool operator==(const ExprAst& a, const ExprAst& b);

 private:
  ExprNodePtr root_;
};

/// Parses the coefficient expression language.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' unary)?
///   primary := number | 'x' | func '(' expr ')' | 'ind' '(' bound ',' bound ')'
///            | '(' expr ')'
///   func    := 'abs' | 'exp' | 'sin' | 'cos' | 'sqrt' | 'sign'
///   bound   := ['-' | '+'] (number | 'inf')
///
/// `sign` only accepts the bare variable: sign(x) = ind(0,inf) - ind(-inf,0).
ExprAst parse(std::string_view source);

double evaluate(const ExprAst& ast, double x, Side side = Side::Exact);

/// Sorted, deduplicated finite boundaries of every indicator and sign node.
std::vector<double> extract_breakpoints(const ExprAst& ast);

/// Fully parenthesised text that parses back to a structurally equal tree.
std::string to_string(const ExprAst& ast);

}  // namespace sdelab
