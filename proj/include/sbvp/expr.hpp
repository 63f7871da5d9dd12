#pragma once

#include <cctype>
#include <charconv>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "sbvp/types.hpp"

namespace sbvp {

/// Closed-form expressions in the variables t and eps over +, -, *, /, ^,
/// sin, cos, exp, numeric literals and the constants i and pi. Powers must
/// have a t-free exponent so that stacks can be produced by symbolic
/// differentiation.
namespace expr {

enum class Op {
  constant,
  var_t,
  var_eps,
  add,
  sub,
  mul,
  div,
  pow,
  neg,
  sin,
  cos,
  exp
};

struct Node;
using ExprPtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  complexd value;  // for constants
  ExprPtr a, b;
};

struct ParseError : Error {
  ParseError(const std::string& what, size_t position_)
      : Error(what), position(position_) {}
  size_t position;  // zero-based offset into the source text
};

inline ExprPtr constant(complexd v) {
  return std::make_shared<Node>(Node{Op::constant, v, nullptr, nullptr});
}

inline bool is_const(const ExprPtr& e, complexd v) {
  return e->op == Op::constant && e->value == v;
}

inline ExprPtr make_unary(Op op, ExprPtr a);

inline ExprPtr make_binary(Op op, ExprPtr a, ExprPtr b) {
  if (a->op == Op::constant && b->op == Op::constant) {
    switch (op) {
      case Op::add: return constant(a->value + b->value);
      case Op::sub: return constant(a->value - b->value);
      case Op::mul: return constant(a->value * b->value);
      case Op::div: return constant(a->value / b->value);
      case Op::pow: return constant(std::pow(a->value, b->value));
      default: break;
    }
  }
  // light folding keeps repeated differentiation from swelling
  if (op == Op::add) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
  }
  if (op == Op::sub && is_const(b, 0.0)) return a;
  if (op == Op::mul) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
  }
  if (op == Op::div && is_const(a, 0.0)) return constant(0.0);
  if (op == Op::pow) {
    if (is_const(b, 1.0)) return a;
    if (is_const(b, 0.0)) return constant(1.0);
  }
  return std::make_shared<Node>(Node{op, complexd(0.0), std::move(a), std::move(b)});
}

inline ExprPtr make_unary(Op op, ExprPtr a) {
  if (a->op == Op::constant) {
    switch (op) {
      case Op::neg: return constant(-a->value);
      case Op::sin: return constant(std::sin(a->value));
      case Op::cos: return constant(std::cos(a->value));
      case Op::exp: return constant(std::exp(a->value));
      default: break;
    }
  }
  return std::make_shared<Node>(Node{op, complexd(0.0), std::move(a), nullptr});
}

inline complexd evaluate(const ExprPtr& e, double t, double eps) {
  switch (e->op) {
    case Op::constant: return e->value;
    case Op::var_t: return complexd(t);
    case Op::var_eps: return complexd(eps);
    case Op::add: return evaluate(e->a, t, eps) + evaluate(e->b, t, eps);
    case Op::sub: return evaluate(e->a, t, eps) - evaluate(e->b, t, eps);
    case Op::mul: return evaluate(e->a, t, eps) * evaluate(e->b, t, eps);
    case Op::div: return evaluate(e->a, t, eps) / evaluate(e->b, t, eps);
    case Op::pow: return std::pow(evaluate(e->a, t, eps), evaluate(e->b, t, eps));
    case Op::neg: return -evaluate(e->a, t, eps);
    case Op::sin: return std::sin(evaluate(e->a, t, eps));
    case Op::cos: return std::cos(evaluate(e->a, t, eps));
    case Op::exp: return std::exp(evaluate(e->a, t, eps));
  }
  return complexd(0.0);
}

inline bool depends_on_t(const ExprPtr& e) {
  switch (e->op) {
    case Op::constant:
    case Op::var_eps: return false;
    case Op::var_t: return true;
    default:
      return (e->a && depends_on_t(e->a)) || (e->b && depends_on_t(e->b));
  }
}

inline bool depends_on_eps(const ExprPtr& e) {
  switch (e->op) {
    case Op::constant:
    case Op::var_t: return false;
    case Op::var_eps: return true;
    default:
      return (e->a && depends_on_eps(e->a)) || (e->b && depends_on_eps(e->b));
  }
}

/// d/dt by the chain rule. Throws on u^v with a t-dependent exponent, which
/// the grammar does not support (no logarithm).
inline ExprPtr differentiate_t(const ExprPtr& e) {
  switch (e->op) {
    case Op::constant:
    case Op::var_eps: return constant(0.0);
    case Op::var_t: return constant(1.0);
    case Op::add: return make_binary(Op::add, differentiate_t(e->a), differentiate_t(e->b));
    case Op::sub: return make_binary(Op::sub, differentiate_t(e->a), differentiate_t(e->b));
    case Op::mul:
      return make_binary(Op::add,
                         make_binary(Op::mul, differentiate_t(e->a), e->b),
                         make_binary(Op::mul, e->a, differentiate_t(e->b)));
    case Op::div:
      return make_binary(
          Op::div,
          make_binary(Op::sub, make_binary(Op::mul, differentiate_t(e->a), e->b),
                      make_binary(Op::mul, e->a, differentiate_t(e->b))),
          make_binary(Op::pow, e->b, constant(2.0)));
    case Op::pow: {
      if (depends_on_t(e->b))
        throw Error("differentiate: exponent of ^ must not depend on t");
      if (!depends_on_t(e->a)) return constant(0.0);
      // d/dt u^c = c * u^(c-1) * u'
      return make_binary(
          Op::mul, e->b,
          make_binary(Op::mul,
                      make_binary(Op::pow, e->a,
                                  make_binary(Op::sub, e->b, constant(1.0))),
                      differentiate_t(e->a)));
    }
    case Op::neg: return make_unary(Op::neg, differentiate_t(e->a));
    case Op::sin:
      return make_binary(Op::mul, make_unary(Op::cos, e->a), differentiate_t(e->a));
    case Op::cos:
      return make_unary(Op::neg, make_binary(Op::mul, make_unary(Op::sin, e->a),
                                             differentiate_t(e->a)));
    case Op::exp:
      return make_binary(Op::mul, make_unary(Op::exp, e->a), differentiate_t(e->a));
  }
  return constant(0.0);
}

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  ExprPtr parse_sum() {
    ExprPtr e = parse_product();
    for (;;) {
      if (eat('+'))
        e = make_binary(Op::add, e, parse_product());
      else if (eat('-'))
        e = make_binary(Op::sub, e, parse_product());
      else
        return e;
    }
  }

  ExprPtr parse_product() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (eat('*'))
        e = make_binary(Op::mul, e, parse_unary());
      else if (eat('/'))
        e = make_binary(Op::div, e, parse_unary());
      else
        return e;
    }
  }

  ExprPtr parse_unary() {
    if (eat('-')) return make_unary(Op::neg, parse_unary());
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_primary();
    if (eat('^')) return make_binary(Op::pow, base, parse_unary());  // right assoc
    return base;
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr parse_number() {
    const size_t start = pos_;
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) throw ParseError("malformed number", start);
    pos_ += static_cast<size_t>(ptr - begin);
    return constant(complexd(value));
  }

  ExprPtr parse_ident() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isalnum(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "t") return std::make_shared<Node>(Node{Op::var_t, {}, nullptr, nullptr});
    if (name == "eps")
      return std::make_shared<Node>(Node{Op::var_eps, {}, nullptr, nullptr});
    if (name == "i") return constant(complexd(0.0, 1.0));
    if (name == "pi") return constant(complexd(3.14159265358979323846));
    Op op;
    if (name == "sin")
      op = Op::sin;
    else if (name == "cos")
      op = Op::cos;
    else if (name == "exp")
      op = Op::exp;
    else
      throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    if (!eat('(')) throw ParseError("expected '(' after function name", pos_);
    ExprPtr arg = parse_sum();
    if (!eat(')')) throw ParseError("expected ')'", pos_);
    return make_unary(op, std::move(arg));
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace detail

inline ExprPtr parse(std::string_view text) { return detail::Parser(text).parse(); }

}  // namespace expr
}  // namespace sbvp
