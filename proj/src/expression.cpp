// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "plex/simd/kernels.hpp"

namespace plex {
namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  std::unique_ptr<ExprNode> parse_all() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    auto node = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return node;
  }

 private:
  static std::unique_ptr<ExprNode> leaf(OpCode op, double value = 0.0, unsigned index = 0) {
    auto n = std::make_unique<ExprNode>();
    n->op = op;
    n->value = value;
    n->index = index;
    return n;
  }

  static std::unique_ptr<ExprNode> node(OpCode op, std::unique_ptr<ExprNode> lhs,
                                        std::unique_ptr<ExprNode> rhs = nullptr) {
    auto n = std::make_unique<ExprNode>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::unique_ptr<ExprNode> parse_expr() {
    auto lhs = parse_term();
    while (true) {
      if (accept('+'))
        lhs = node(OpCode::add, std::move(lhs), parse_term());
      else if (accept('-'))
        lhs = node(OpCode::sub, std::move(lhs), parse_term());
      else
        return lhs;
    }
  }

  std::unique_ptr<ExprNode> parse_term() {
    auto lhs = parse_unary();
    while (true) {
      if (accept('*'))
        lhs = node(OpCode::mul, std::move(lhs), parse_unary());
      else if (accept('/'))
        lhs = node(OpCode::div, std::move(lhs), parse_unary());
      else
        return lhs;
    }
  }

  std::unique_ptr<ExprNode> parse_unary() {
    if (accept('-')) return node(OpCode::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  std::unique_ptr<ExprNode> parse_power() {
    auto base = parse_primary();
    if (accept('^')) return node(OpCode::pow, std::move(base), parse_exponent());
    return base;
  }

  std::unique_ptr<ExprNode> parse_exponent() {
    if (accept('-')) return node(OpCode::neg, parse_exponent());
    if (accept('+')) return parse_exponent();
    return parse_power();
  }

  std::unique_ptr<ExprNode> parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  std::unique_ptr<ExprNode> parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) throw ParseError("malformed number", start);
    return leaf(OpCode::push_const, value);
  }

  std::unique_ptr<ExprNode> parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);

    static const std::pair<const char*, OpCode> functions[] = {
        {"sin", OpCode::sin}, {"cos", OpCode::cos}, {"exp", OpCode::exp}, {"abs", OpCode::abs}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
        auto arg = parse_expr();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return node(op, std::move(arg));
      }
    }
    if (name == "x") return leaf(OpCode::push_x);
    if (name == "s") return leaf(OpCode::push_s);
    if (name == "pi") return leaf(OpCode::push_const, std::numbers::pi);
    if (name.size() >= 2 && name[0] == 'w' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      unsigned idx = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (idx == 0) throw ParseError("torus coordinates are numbered from w1", start);
      return leaf(OpCode::push_w, 0.0, idx - 1);
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

void compile(const ExprNode& n, std::vector<Instruction>& out) {
  switch (n.op) {
    case OpCode::push_const:
    case OpCode::push_x:
    case OpCode::push_s:
    case OpCode::push_w:
      out.push_back({n.op, n.value, n.index});
      return;
    default:
      break;
  }
  if (n.lhs) compile(*n.lhs, out);
  if (n.rhs) compile(*n.rhs, out);
  out.push_back({n.op, 0.0, 0});
}

double divide(double num, double den) {
  if (den == 0.0) throw EvalError("division by zero");
  return num / den;
}

double apply_binary(OpCode op, double a, double b) {
  switch (op) {
    case OpCode::add:
      return a + b;
    case OpCode::sub:
      return a - b;
    case OpCode::mul:
      return a * b;
    case OpCode::div:
      return divide(a, b);
    case OpCode::pow:
      return std::pow(a, b);
    default:
      return 0.0;
  }
}

double apply_unary(OpCode op, double a) {
  switch (op) {
    case OpCode::neg:
      return -a;
    case OpCode::sin:
      return std::sin(a);
    case OpCode::cos:
      return std::cos(a);
    case OpCode::exp:
      return std::exp(a);
    case OpCode::abs:
      return std::fabs(a);
    default:
      return 0.0;
  }
}

bool is_binary(OpCode op) {
  return op == OpCode::add || op == OpCode::sub || op == OpCode::mul || op == OpCode::div ||
         op == OpCode::pow;
}

void format_number(double v, std::string& out) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

void unparse_into(const ExprNode& n, std::string& out) {
  switch (n.op) {
    case OpCode::push_const:
      if (n.value < 0.0) {
        out += "(-";
        format_number(-n.value, out);
        out += ")";
      } else {
        format_number(n.value, out);
      }
      return;
    case OpCode::push_x:
      out += "x";
      return;
    case OpCode::push_s:
      out += "s";
      return;
    case OpCode::push_w:
      out += "w" + std::to_string(n.index + 1);
      return;
    case OpCode::neg:
      out += "(-";
      unparse_into(*n.lhs, out);
      out += ")";
      return;
    case OpCode::sin:
    case OpCode::cos:
    case OpCode::exp:
    case OpCode::abs: {
      static const char* names[] = {"sin", "cos", "exp", "abs"};
      out += names[static_cast<int>(n.op) - static_cast<int>(OpCode::sin)];
      out += "(";
      unparse_into(*n.lhs, out);
      out += ")";
      return;
    }
    default: {
      static const char symbols[] = {'+', '-', '*', '/', '^'};
      out += "(";
      unparse_into(*n.lhs, out);
      out += symbols[static_cast<int>(n.op) - static_cast<int>(OpCode::add)];
      unparse_into(*n.rhs, out);
      out += ")";
      return;
    }
  }
}

}  // namespace

Expression::Expression() : Expression(constant(0.0)) {}

Expression::Expression(std::string text, std::shared_ptr<const ExprNode> root)
    : text_(std::move(text)), root_(std::move(root)) {
  compile(*root_, program_);
  for (const auto& ins : program_) {
    if (ins.op == OpCode::push_w) max_w_ = std::max(max_w_, ins.index + 1);
    if (ins.op == OpCode::push_x) uses_x_ = true;
    if (ins.op == OpCode::push_s) uses_s_ = true;
  }
}

Expression Expression::parse(const std::string& text) {
  Parser p(text);
  return Expression(text, std::shared_ptr<const ExprNode>(p.parse_all()));
}

Expression Expression::constant(double value) {
  auto n = std::make_unique<ExprNode>();
  n->op = OpCode::push_const;
  n->value = value;
  std::string text;
  format_number(value, text);
  return Expression(text, std::shared_ptr<const ExprNode>(std::move(n)));
}

bool Expression::is_identically_zero() const {
  return root_->op == OpCode::push_const && root_->value == 0.0;
}

std::string Expression::unparse() const {
  std::string out;
  unparse_into(*root_, out);
  return out;
}

double Expression::eval(const EvalPoint& p) const {
  double stack[64] = {};
  std::vector<double> heap;
  double* st = stack;
  if (program_.size() > 64) {
    heap.resize(program_.size());
    st = heap.data();
  }
  std::size_t top = 0;
  for (const auto& ins : program_) {
    switch (ins.op) {
      case OpCode::push_const:
        st[top++] = ins.value;
        break;
      case OpCode::push_x:
        st[top++] = p.x;
        break;
      case OpCode::push_s:
        st[top++] = p.s;
        break;
      case OpCode::push_w:
        if (ins.index >= p.w.size())
          throw EvalError("variable w" + std::to_string(ins.index + 1) +
                          " exceeds the torus dimension " + std::to_string(p.w.size()));
        st[top++] = p.w[ins.index];
        break;
      default:
        if (is_binary(ins.op)) {
          const double b = st[--top];
          st[top - 1] = apply_binary(ins.op, st[top - 1], b);
        } else {
          st[top - 1] = apply_unary(ins.op, st[top - 1]);
        }
    }
  }
  return st[0];
}

void BatchEvaluator::eval(const Expression& e, std::span<const double> xs,
                          std::span<const double> w, double s, std::span<double> out) {
  const std::size_t n = xs.size();
  const auto& k = simd::active();
  struct Slot {
    bool uniform;
    double value;
    std::size_t buf;
  };
  std::vector<Slot> stack;
  stack.reserve(e.program().size());
  std::size_t next_buf = 0;
  auto fresh = [&]() -> std::size_t {
    if (next_buf == pool_.size()) pool_.emplace_back();
    pool_[next_buf].resize(n);
    return next_buf++;
  };
  // Buffers are released in stack order, so a simple bump allocator suffices
  // as long as results are written into the deeper operand's buffer.
  auto release_above = [&](std::size_t keep) { next_buf = keep; };

  for (const auto& ins : e.program()) {
    switch (ins.op) {
      case OpCode::push_const:
        stack.push_back({true, ins.value, 0});
        break;
      case OpCode::push_s:
        stack.push_back({true, s, 0});
        break;
      case OpCode::push_w:
        if (ins.index >= w.size())
          throw EvalError("variable w" + std::to_string(ins.index + 1) +
                          " exceeds the torus dimension " + std::to_string(w.size()));
        stack.push_back({true, w[ins.index], 0});
        break;
      case OpCode::push_x: {
        const std::size_t b = fresh();
        std::copy(xs.begin(), xs.end(), pool_[b].begin());
        stack.push_back({false, 0.0, b});
        break;
      }
      default: {
        if (!is_binary(ins.op)) {
          Slot& a = stack.back();
          if (a.uniform) {
            a.value = apply_unary(ins.op, a.value);
            break;
          }
          double* v = pool_[a.buf].data();
          switch (ins.op) {
            case OpCode::neg:
              k.vneg(v, v, n);
              break;
            case OpCode::abs:
              k.vabs(v, v, n);
              break;
            case OpCode::sin:
              for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(v[i]);
              break;
            case OpCode::cos:
              for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(v[i]);
              break;
            case OpCode::exp:
              for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(v[i]);
              break;
            default:
              break;
          }
          break;
        }
        const Slot rhs = stack.back();
        stack.pop_back();
        Slot& lhs = stack.back();
        if (lhs.uniform && rhs.uniform) {
          lhs.value = apply_binary(ins.op, lhs.value, rhs.value);
          break;
        }
        if (ins.op == OpCode::div) {
          if (rhs.uniform ? rhs.value == 0.0 : k.any_zero(pool_[rhs.buf].data(), n))
            throw EvalError("division by zero");
        }
        if (lhs.uniform) {
          // result goes into the rhs buffer, which then becomes the lhs slot
          double* r = pool_[rhs.buf].data();
          switch (ins.op) {
            case OpCode::add:
              for (std::size_t i = 0; i < n; ++i) r[i] = lhs.value + r[i];
              break;
            case OpCode::sub:
              k.vsub_from_scalar(lhs.value, r, r, n);
              break;
            case OpCode::mul:
              for (std::size_t i = 0; i < n; ++i) r[i] = lhs.value * r[i];
              break;
            case OpCode::div:
              k.vdiv_scalar_by(lhs.value, r, r, n);
              break;
            case OpCode::pow:
              for (std::size_t i = 0; i < n; ++i) r[i] = std::pow(lhs.value, r[i]);
              break;
            default:
              break;
          }
          lhs = {false, 0.0, rhs.buf};
          break;
        }
        double* l = pool_[lhs.buf].data();
        if (rhs.uniform) {
          switch (ins.op) {
            case OpCode::add:
              k.vadd_scalar(l, rhs.value, l, n);
              break;
            case OpCode::sub:
              for (std::size_t i = 0; i < n; ++i) l[i] = l[i] - rhs.value;
              break;
            case OpCode::mul:
              k.vmul_scalar(l, rhs.value, l, n);
              break;
            case OpCode::div:
              for (std::size_t i = 0; i < n; ++i) l[i] = l[i] / rhs.value;
              break;
            case OpCode::pow:
              for (std::size_t i = 0; i < n; ++i) l[i] = std::pow(l[i], rhs.value);
              break;
            default:
              break;
          }
          break;
        }
        const double* r = pool_[rhs.buf].data();
        switch (ins.op) {
          case OpCode::add:
            k.vadd(l, r, l, n);
            break;
          case OpCode::sub:
            k.vsub(l, r, l, n);
            break;
          case OpCode::mul:
            k.vmul(l, r, l, n);
            break;
          case OpCode::div:
            k.vdiv(l, r, l, n);
            break;
          case OpCode::pow:
            for (std::size_t i = 0; i < n; ++i) l[i] = std::pow(l[i], r[i]);
            break;
          default:
            break;
        }
        release_above(rhs.buf);
        break;
      }
    }
  }
  const Slot& result = stack.back();
  if (result.uniform)
    std::fill(out.begin(), out.end(), result.value);
  else
    std::copy(pool_[result.buf].begin(), pool_[result.buf].end(), out.begin());
}

}  // namespace plex
