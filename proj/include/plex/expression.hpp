// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Coefficient expression language. Grammar (see docs/expressions.md):
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = ("-" | "+") unary | power ;
//   power   = primary [ "^" exponent ] ;
//   exponent= ("-" | "+") exponent | power ;
//   primary = number | variable | function "(" expr ")" | "(" expr ")" ;
//
// Variables: x, w1..wd (torus coordinates), s (switching amplitude), pi.
// Functions: sin, cos, exp, abs.

namespace plex {

class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class EvalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class OpCode : unsigned char {
  push_const,
  push_x,
  push_w,
  push_s,
  add,
  sub,
  mul,
  div,
  pow,
  neg,
  sin,
  cos,
  exp,
  abs,
};

struct Instruction {
  OpCode op;
  double value = 0.0;   // push_const
  unsigned index = 0;   // push_w (0-based)
};

/// Node of the parsed tree.
struct ExprNode {
  OpCode op;
  double value = 0.0;
  unsigned index = 0;
  std::unique_ptr<ExprNode> lhs;
  std::unique_ptr<ExprNode> rhs;
};

/// Point at which an expression is evaluated.
struct EvalPoint {
  double x = 0.0;
  std::span<const double> w;
  double s = 0.0;
};

/// Immutable parsed expression with a compiled postfix program.
class Expression {
 public:
  Expression();  // the constant 0
  static Expression parse(const std::string& text);
  static Expression constant(double value);

  const std::string& text() const { return text_; }
  const ExprNode& root() const { return *root_; }
  const std::vector<Instruction>& program() const { return program_; }

  double eval(const EvalPoint& p) const;

  /// Highest torus coordinate referenced (1-based), 0 if none.
  unsigned max_w_index() const { return max_w_; }
  bool uses_x() const { return uses_x_; }
  bool uses_s() const { return uses_s_; }
  /// Depends on the base point (w or s).
  bool depends_on_flow() const { return max_w_ > 0 || uses_s_; }
  /// True when the tree is a literal constant equal to zero.
  bool is_identically_zero() const;

  /// Fully parenthesized text that parses back to an equivalent tree.
  std::string unparse() const;

 private:
  explicit Expression(std::string text, std::shared_ptr<const ExprNode> root);

  std::string text_;
  std::shared_ptr<const ExprNode> root_;
  std::vector<Instruction> program_;
  unsigned max_w_ = 0;
  bool uses_x_ = false;
  bool uses_s_ = false;
};

/// Evaluates an expression on many x values at a fixed base point, keeping
/// x-independent subexpressions scalar. Results are bit-identical to
/// Expression::eval. Holds scratch buffers; not thread-safe, one per thread.
class BatchEvaluator {
 public:
  void eval(const Expression& e, std::span<const double> xs, std::span<const double> w, double s,
            std::span<double> out);

 private:
  std::vector<std::vector<double>> pool_;
};

}  // namespace plex
