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

#include "sdelab/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace sdelab {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::EmptyInput: return "EmptyInput";
    case ParseErrorKind::UnbalancedParens: return "UnbalancedParens";
    case ParseErrorKind::UnknownIdentifier: return "UnknownIdentifier";
    case ParseErrorKind::IndicatorBoundsInvalid: return "IndicatorBoundsInvalid";
    case ParseErrorKind::InfinityOutsideIndicator: return "InfinityOutsideIndicator";
    case ParseErrorKind::InvalidNumber: return "InvalidNumber";
    case ParseErrorKind::InvalidSignArgument: return "InvalidSignArgument";
    case ParseErrorKind::UnexpectedToken: return "UnexpectedToken";
  }
  return "Unknown";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, std::string expected)
    : std::runtime_error(std::string(to_string(kind)) + " at byte " + std::to_string(offset) +
                         ": expected " + expected),
      kind_(kind),
      offset_(offset),
      expected_(std::move(expected)) {}

EvalError::EvalError(EvalErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

ExprAst::ExprAst(ExprNodePtr root) : root_(std::move(root)) {}

namespace {

bool nodes_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Constant: return a.value == b.value;
    case NodeKind::Variable: return true;
    case NodeKind::Indicator: return a.lo == b.lo && a.hi == b.hi;
    case NodeKind::Negate: return nodes_equal(*a.lhs, *b.lhs);
    case NodeKind::Call: return a.function == b.function && nodes_equal(*a.lhs, *b.lhs);
    default: return nodes_equal(*a.lhs, *b.lhs) && nodes_equal(*a.rhs, *b.rhs);
  }
}

ExprNodePtr make_node(ExprNode node) { return std::make_shared<const ExprNode>(std::move(node)); }

ExprNodePtr make_binary(NodeKind kind, ExprNodePtr lhs, ExprNodePtr rhs) {
  ExprNode n;
  n.kind = kind;
  n.lhs = std::move(lhs);
  n.rhs = std::move(rhs);
  return make_node(std::move(n));
}

constexpr std::array<std::pair<std::string_view, Function>, 6> kFunctions{{
    {"abs", Function::Abs},
    {"exp", Function::Exp},
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"sqrt", Function::Sqrt},
    {"sign", Function::Sign},
}};

std::string_view function_name(Function f) {
  for (const auto& [name, fn] : kFunctions)
    if (fn == f) return name;
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  ExprNodePtr parse_all() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(ParseErrorKind::EmptyInput, pos_, "an expression");
    ExprNodePtr root = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) {
      if (src_[pos_] == ')')
        throw ParseError(ParseErrorKind::UnbalancedParens, pos_, "end of input (unmatched ')')");
      throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "an operator or end of input");
    }
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }

  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  void expect_close(std::size_t open_at) {
    if (accept(')')) return;
    skip_ws();
    if (pos_ == src_.size())
      throw ParseError(ParseErrorKind::UnbalancedParens, pos_,
                       "')' to close '(' at byte " + std::to_string(open_at));
    throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "')'");
  }

  ExprNodePtr parse_expr() {
    ExprNodePtr lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = make_binary(NodeKind::Add, std::move(lhs), parse_term());
      else if (accept('-'))
        lhs = make_binary(NodeKind::Sub, std::move(lhs), parse_term());
      else
        return lhs;
    }
  }

  ExprNodePtr parse_term() {
    ExprNodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = make_binary(NodeKind::Mul, std::move(lhs), parse_unary());
      else if (accept('/'))
        lhs = make_binary(NodeKind::Div, std::move(lhs), parse_unary());
      else
        return lhs;
    }
  }

  ExprNodePtr parse_unary() {
    if (accept('-')) {
      ExprNode n;
      n.kind = NodeKind::Negate;
      n.lhs = parse_unary();
      return make_node(std::move(n));
    }
    return parse_power();
  }

  ExprNodePtr parse_power() {
    ExprNodePtr base = parse_primary();
    if (accept('^')) return make_binary(NodeKind::Pow, std::move(base), parse_unary());
    return base;
  }

  std::string_view read_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    return src_.substr(start, pos_ - start);
  }

  double read_number() {
    const std::size_t start = pos_;
    auto is_digit = [&](std::size_t i) {
      return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]));
    };
    bool digits = false;
    while (is_digit(pos_)) ++pos_, digits = true;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (is_digit(pos_)) ++pos_, digits = true;
    }
    if (!digits) throw ParseError(ParseErrorKind::InvalidNumber, start, "a decimal literal");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (!is_digit(p)) throw ParseError(ParseErrorKind::InvalidNumber, p, "exponent digits");
      while (is_digit(p)) ++p;
      pos_ = p;
    }
    double value = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
      throw ParseError(ParseErrorKind::InvalidNumber, start, "a finite decimal literal");
    return value;
  }

  double parse_bound() {
    double sign = 1.0;
    if (accept('-'))
      sign = -1.0;
    else
      accept('+');
    skip_ws();
    if (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) {
      const std::size_t at = pos_;
      if (read_identifier() != "inf")
        throw ParseError(ParseErrorKind::UnknownIdentifier, at, "a number or 'inf'");
      return sign * std::numeric_limits<double>::infinity();
    }
    if (pos_ == src_.size() || !(std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                                 src_[pos_] == '.'))
      throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "a number or 'inf'");
    return sign * read_number();
  }

  ExprNodePtr parse_indicator(std::size_t ident_at) {
    const std::size_t open_at = pos_;
    if (!accept('(')) throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "'(' after ind");
    ExprNode n;
    n.kind = NodeKind::Indicator;
    n.lo = parse_bound();
    if (!accept(',')) throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "',' in ind(a,b)");
    n.hi = parse_bound();
    expect_close(open_at);
    if (!(n.lo < n.hi))
      throw ParseError(ParseErrorKind::IndicatorBoundsInvalid, ident_at, "ind(a,b) with a < b");
    return make_node(std::move(n));
  }

  ExprNodePtr parse_primary() {
    skip_ws();
    if (pos_ == src_.size())
      throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "a number, 'x', a call or '('");
    const char c = src_[pos_];
    if (c == '(') {
      const std::size_t open_at = pos_++;
      ExprNodePtr inner = parse_expr();
      expect_close(open_at);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      ExprNode n;
      n.kind = NodeKind::Constant;
      n.value = read_number();
      return make_node(std::move(n));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t at = pos_;
      const std::string_view ident = read_identifier();
      if (ident == "x") {
        ExprNode n;
        n.kind = NodeKind::Variable;
        return make_node(std::move(n));
      }
      if (ident == "ind") return parse_indicator(at);
      if (ident == "inf")
        throw ParseError(ParseErrorKind::InfinityOutsideIndicator, at, "a finite operand");
      for (const auto& [name, fn] : kFunctions) {
        if (ident != name) continue;
        const std::size_t open_at = pos_;
        if (!accept('('))
          throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "'(' after function name");
        ExprNode n;
        n.kind = NodeKind::Call;
        n.function = fn;
        const std::size_t arg_at = pos_;
        n.lhs = parse_expr();
        expect_close(open_at);
        if (fn == Function::Sign && n.lhs->kind != NodeKind::Variable)
          throw ParseError(ParseErrorKind::InvalidSignArgument, arg_at, "sign(x)");
        return make_node(std::move(n));
      }
      throw ParseError(ParseErrorKind::UnknownIdentifier, at,
                       "x, ind, abs, exp, sin, cos, sqrt or sign");
    }
    if (c == ')')
      throw ParseError(ParseErrorKind::UnbalancedParens, pos_, "an operand before ')'");
    throw ParseError(ParseErrorKind::UnexpectedToken, pos_, "a number, 'x', a call or '('");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double int_power(double base, std::int64_t k) {
  const bool invert = k < 0;
  std::uint64_t e = invert ? static_cast<std::uint64_t>(-k) : static_cast<std::uint64_t>(k);
  double result = 1.0;
  double b = base;
  while (e != 0) {
    if (e & 1U) result *= b;
    e >>= 1U;
    if (e != 0) b *= b;
  }
  if (invert) {
    if (result == 0.0) throw EvalError(EvalErrorKind::DivisionByZero, "zero to a negative power");
    result = 1.0 / result;
  }
  return result;
}

double indicator(const ExprNode& n, double x, Side side) {
  if (x == n.lo) return side == Side::Right ? 1.0 : 0.0;
  if (x == n.hi) return side == Side::Left ? 1.0 : 0.0;
  return (n.lo < x && x < n.hi) ? 1.0 : 0.0;
}

double eval_node(const ExprNode& n, double x, Side side) {
  switch (n.kind) {
    case NodeKind::Constant: return n.value;
    case NodeKind::Variable: return x;
    case NodeKind::Indicator: return indicator(n, x, side);
    case NodeKind::Negate: return -eval_node(*n.lhs, x, side);
    case NodeKind::Add: return eval_node(*n.lhs, x, side) + eval_node(*n.rhs, x, side);
    case NodeKind::Sub: return eval_node(*n.lhs, x, side) - eval_node(*n.rhs, x, side);
    case NodeKind::Mul: return eval_node(*n.lhs, x, side) * eval_node(*n.rhs, x, side);
    case NodeKind::Div: {
      const double num = eval_node(*n.lhs, x, side);
      const double den = eval_node(*n.rhs, x, side);
      if (den == 0.0) throw EvalError(EvalErrorKind::DivisionByZero, "division by zero");
      return num / den;
    }
    case NodeKind::Pow: {
      const double base = eval_node(*n.lhs, x, side);
      const double e = eval_node(*n.rhs, x, side);
      if (std::isnan(base) || std::isnan(e))
        throw EvalError(EvalErrorKind::Overflow, "intermediate overflow in power");
      if (e == std::trunc(e) && std::abs(e) <= 0x1p62)
        return int_power(base, static_cast<std::int64_t>(e));
      if (base < 0.0)
        throw EvalError(EvalErrorKind::DomainError, "negative base with non-integer exponent");
      if (base == 0.0 && e < 0.0)
        throw EvalError(EvalErrorKind::DivisionByZero, "zero to a negative power");
      return std::pow(base, e);
    }
    case NodeKind::Call: {
      const double a = eval_node(*n.lhs, x, side);
      switch (n.function) {
        case Function::Abs: return std::abs(a);
        case Function::Exp: return std::exp(a);
        case Function::Sin: return std::sin(a);
        case Function::Cos: return std::cos(a);
        case Function::Sqrt:
          if (a < 0.0) throw EvalError(EvalErrorKind::DomainError, "sqrt of a negative value");
          return std::sqrt(a);
        case Function::Sign:
          if (a > 0.0) return 1.0;
          if (a < 0.0) return -1.0;
          return side == Side::Right ? 1.0 : side == Side::Left ? -1.0 : 0.0;
      }
      break;
    }
  }
  return 0.0;
}

void collect_breakpoints(const ExprNode& n, std::vector<double>& out) {
  switch (n.kind) {
    case NodeKind::Indicator:
      if (std::isfinite(n.lo)) out.push_back(n.lo);
      if (std::isfinite(n.hi)) out.push_back(n.hi);
      return;
    case NodeKind::Call:
      if (n.function == Function::Sign) out.push_back(0.0);
      collect_breakpoints(*n.lhs, out);
      return;
    case NodeKind::Constant:
    case NodeKind::Variable: return;
    case NodeKind::Negate: collect_breakpoints(*n.lhs, out); return;
    default:
      collect_breakpoints(*n.lhs, out);
      collect_breakpoints(*n.rhs, out);
  }
}

void append_number(std::string& out, double v) {
  if (std::isinf(v)) {
    out += v > 0 ? "inf" : "-inf";
    return;
  }
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Constant: append_number(out, n.value); return;
    case NodeKind::Variable: out += 'x'; return;
    case NodeKind::Indicator:
      out += "ind(";
      append_number(out, n.lo);
      out += ',';
      append_number(out, n.hi);
      out += ')';
      return;
    case NodeKind::Negate:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case NodeKind::Call:
      out += function_name(n.function);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
    default: break;
  }
  char op = '+';
  switch (n.kind) {
    case NodeKind::Sub: op = '-'; break;
    case NodeKind::Mul: op = '*'; break;
    case NodeKind::Div: op = '/'; break;
    case NodeKind::Pow: op = '^'; break;
    default: break;
  }
  out += '(';
  print_node(*n.lhs, out);
  out += op;
  print_node(*n.rhs, out);
  out += ')';
}

}  // namespace

bool operator==(const ExprAst& a, const ExprAst& b) { return nodes_equal(*a.root_, *b.root_); }

ExprAst parse(std::string_view source) { return ExprAst(Parser(source).parse_all()); }

double evaluate(const ExprAst& ast, double x, Side side) {
  const double v = eval_node(ast.root(), x, side);
  if (std::isnan(v)) throw EvalError(EvalErrorKind::Overflow, "expression evaluated to NaN");
  return v;
}

std::vector<double> extract_breakpoints(const ExprAst& ast) {
  std::vector<double> out;
  collect_breakpoints(ast.root(), out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string to_string(const ExprAst& ast) {
  std::string out;
  print_node(ast.root(), out);
  return out;
}

}  // namespace sdelab
