#pragma once

// Small symbolic expression language over named real variables: parsing,
// printing, differentiation, pole-aware evaluation, and a probabilistic
// identically-zero test on a box.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nws/errors.hpp"

namespace nws {

enum class UnaryOp { Neg, Exp, Ln, Sqrt, Sin, Cos, Tan, Sinh, Cosh, Tanh, Coth, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

// "External" is an opaque named function of a single variable with a caller
// supplied evaluator and a symbolic derivative. It cannot be produced by the
// parser; it exists so antiderivatives can appear inside vector-field
// components while differentiation stays closed.
struct Node {
  enum class Kind { Number, Constant, Variable, Unary, Binary, External };
  Kind kind;
  double number = 0.0;
  std::string name;  // Variable / Constant / External display name
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  NodePtr a, b;                                // operands (unary uses a)
  std::function<double(double)> external_fn;   // External only
  NodePtr external_deriv;                      // External only
  std::string external_var = "t";              // External only
};

inline NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->number = v;
  return n;
}

}  // namespace detail

class Expr;

// Assignment of values to variable names.
class EvalPoint {
 public:
  EvalPoint() = default;
  EvalPoint(std::initializer_list<std::pair<std::string, double>> init) {
    for (const auto& kv : init) set(kv.first, kv.second);
  }
  void set(const std::string& name, double value) {
    for (auto& kv : vals_) {
      if (kv.first == name) {
        kv.second = value;
        return;
      }
    }
    vals_.emplace_back(name, value);
  }
  std::optional<double> get(const std::string& name) const {
    for (const auto& kv : vals_)
      if (kv.first == name) return kv.second;
    return std::nullopt;
  }
  const std::vector<std::pair<std::string, double>>& entries() const { return vals_; }

 private:
  std::vector<std::pair<std::string, double>> vals_;
};

// Result of evaluation: either a finite value or a pole marker naming the
// offending subexpression.
struct EvalResult {
  double value = 0.0;
  bool pole = false;
  std::string pole_at;  // printed offending subexpression when pole
};

class Expr {
 public:
  Expr() : node_(detail::make_number(0.0)) {}
  explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}

  static Expr number(double v) { return Expr(detail::make_number(v)); }
  static Expr variable(const std::string& name) {
    auto n = std::make_shared<detail::Node>();
    n->kind = detail::Node::Kind::Variable;
    n->name = name;
    return Expr(n);
  }
  static Expr constant(const std::string& name);
  static Expr external(const std::string& name, std::function<double(double)> fn,
                       Expr derivative, const std::string& var = "t");

  const detail::Node& node() const { return *node_; }
  const detail::NodePtr& ptr() const { return node_; }

  bool is_number() const { return node_->kind == detail::Node::Kind::Number; }
  bool is_number(double v) const { return is_number() && node_->number == v; }

 private:
  detail::NodePtr node_;
};

namespace detail {

inline NodePtr make_unary(UnaryOp op, NodePtr a) {
  if (op == UnaryOp::Neg) {
    if (a->kind == Node::Kind::Number) return make_number(-a->number);
    if (a->kind == Node::Kind::Unary && a->uop == UnaryOp::Neg) return a->a;
  }
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Unary;
  n->uop = op;
  n->a = std::move(a);
  return n;
}

inline bool is_num(const NodePtr& n, double v) {
  return n->kind == Node::Kind::Number && n->number == v;
}

inline NodePtr make_binary(BinaryOp op, NodePtr a, NodePtr b) {
  const bool an = a->kind == Node::Kind::Number;
  const bool bn = b->kind == Node::Kind::Number;
  switch (op) {
    case BinaryOp::Add:
      if (an && bn) return make_number(a->number + b->number);
      if (is_num(a, 0)) return b;
      if (is_num(b, 0)) return a;
      break;
    case BinaryOp::Sub:
      if (an && bn) return make_number(a->number - b->number);
      if (is_num(b, 0)) return a;
      if (is_num(a, 0)) return make_unary(UnaryOp::Neg, std::move(b));
      break;
    case BinaryOp::Mul:
      if (an && bn) return make_number(a->number * b->number);
      if (is_num(a, 0) || is_num(b, 0)) return make_number(0.0);
      if (is_num(a, 1)) return b;
      if (is_num(b, 1)) return a;
      break;
    case BinaryOp::Div:
      // 0/x is not folded: x may vanish and the pole must survive.
      if (an && bn && b->number != 0.0) return make_number(a->number / b->number);
      if (is_num(b, 1)) return a;
      break;
    case BinaryOp::Pow:
      if (is_num(b, 1)) return a;
      if (is_num(b, 0)) return make_number(1.0);
      if (an && bn) {
        double r = std::pow(a->number, b->number);
        bool int_exp = b->number == std::floor(b->number);
        if (std::isfinite(r) && (a->number > 0 || int_exp)) return make_number(r);
      }
      break;
  }
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Binary;
  n->bop = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

}  // namespace detail

inline Expr Expr::constant(const std::string& name) {
  auto n = std::make_shared<detail::Node>();
  n->kind = detail::Node::Kind::Constant;
  n->name = name;
  n->number = (name == "pi") ? 3.14159265358979323846 : 2.71828182845904523536;
  return Expr(n);
}

inline Expr Expr::external(const std::string& name, std::function<double(double)> fn,
                           Expr derivative, const std::string& var) {
  auto n = std::make_shared<detail::Node>();
  n->kind = detail::Node::Kind::External;
  n->name = name;
  n->external_fn = std::move(fn);
  n->external_deriv = derivative.ptr();
  n->external_var = var;
  return Expr(n);
}

inline Expr operator+(const Expr& a, const Expr& b) {
  return Expr(detail::make_binary(BinaryOp::Add, a.ptr(), b.ptr()));
}
inline Expr operator-(const Expr& a, const Expr& b) {
  return Expr(detail::make_binary(BinaryOp::Sub, a.ptr(), b.ptr()));
}
inline Expr operator*(const Expr& a, const Expr& b) {
  return Expr(detail::make_binary(BinaryOp::Mul, a.ptr(), b.ptr()));
}
inline Expr operator/(const Expr& a, const Expr& b) {
  return Expr(detail::make_binary(BinaryOp::Div, a.ptr(), b.ptr()));
}
inline Expr operator-(const Expr& a) { return Expr(detail::make_unary(UnaryOp::Neg, a.ptr())); }
inline Expr operator+(const Expr& a, double b) { return a + Expr::number(b); }
inline Expr operator+(double a, const Expr& b) { return Expr::number(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - Expr::number(b); }
inline Expr operator-(double a, const Expr& b) { return Expr::number(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * Expr::number(b); }
inline Expr operator*(double a, const Expr& b) { return Expr::number(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / Expr::number(b); }
inline Expr operator/(double a, const Expr& b) { return Expr::number(a) / b; }

inline Expr pow(const Expr& a, const Expr& b) {
  return Expr(detail::make_binary(BinaryOp::Pow, a.ptr(), b.ptr()));
}
inline Expr pow(const Expr& a, double b) { return pow(a, Expr::number(b)); }
inline Expr apply(UnaryOp op, const Expr& a) { return Expr(detail::make_unary(op, a.ptr())); }
inline Expr exp(const Expr& a) { return apply(UnaryOp::Exp, a); }
inline Expr ln(const Expr& a) { return apply(UnaryOp::Ln, a); }
inline Expr sqrt(const Expr& a) { return apply(UnaryOp::Sqrt, a); }
inline Expr sin(const Expr& a) { return apply(UnaryOp::Sin, a); }
inline Expr cos(const Expr& a) { return apply(UnaryOp::Cos, a); }
inline Expr tan(const Expr& a) { return apply(UnaryOp::Tan, a); }
inline Expr sinh(const Expr& a) { return apply(UnaryOp::Sinh, a); }
inline Expr cosh(const Expr& a) { return apply(UnaryOp::Cosh, a); }
inline Expr tanh(const Expr& a) { return apply(UnaryOp::Tanh, a); }
inline Expr coth(const Expr& a) { return apply(UnaryOp::Coth, a); }
inline Expr abs(const Expr& a) { return apply(UnaryOp::Abs, a); }

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "neg";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Ln: return "ln";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Tan: return "tan";
    case UnaryOp::Sinh: return "sinh";
    case UnaryOp::Cosh: return "cosh";
    case UnaryOp::Tanh: return "tanh";
    case UnaryOp::Coth: return "coth";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

inline std::optional<UnaryOp> function_by_name(const std::string& s) {
  static const std::pair<const char*, UnaryOp> table[] = {
      {"neg", UnaryOp::Neg},   {"exp", UnaryOp::Exp},   {"ln", UnaryOp::Ln},
      {"sqrt", UnaryOp::Sqrt}, {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},
      {"tan", UnaryOp::Tan},   {"sinh", UnaryOp::Sinh}, {"cosh", UnaryOp::Cosh},
      {"tanh", UnaryOp::Tanh}, {"coth", UnaryOp::Coth}, {"abs", UnaryOp::Abs},
  };
  for (const auto& e : table)
    if (s == e.first) return e.second;
  return std::nullopt;
}

struct Token {
  enum class Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };
  Kind kind;
  double value = 0.0;
  std::string text;
  std::size_t offset = 0;
};

inline std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  auto push = [&](Token::Kind k, std::size_t off) { out.push_back({k, 0.0, "", off}); };
  while (i < n) {
    char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    std::size_t start = i;
    if ((c >= '0' && c <= '9') || (c == '.' && i + 1 < n && s[i + 1] >= '0' && s[i + 1] <= '9')) {
      while (i < n && s[i] >= '0' && s[i] <= '9') ++i;
      if (i < n && s[i] == '.') {
        ++i;
        while (i < n && s[i] >= '0' && s[i] <= '9') ++i;
      }
      if (i < n && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t mark = i;
        ++i;
        if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
        if (i < n && s[i] >= '0' && s[i] <= '9') {
          while (i < n && s[i] >= '0' && s[i] <= '9') ++i;
        } else {
          i = mark;  // the 'e' belongs to a following identifier
        }
      }
      std::string text = s.substr(start, i - start);
      Token t{Token::Kind::Number, std::strtod(text.c_str(), nullptr), text, start};
      out.push_back(t);
      continue;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      while (i < n && ((s[i] >= 'a' && s[i] <= 'z') || (s[i] >= 'A' && s[i] <= 'Z') ||
                       (s[i] >= '0' && s[i] <= '9') || s[i] == '_'))
        ++i;
      Token t{Token::Kind::Ident, 0.0, s.substr(start, i - start), start};
      out.push_back(t);
      continue;
    }
    switch (c) {
      case '+': push(Token::Kind::Plus, i); break;
      case '-': push(Token::Kind::Minus, i); break;
      case '*': push(Token::Kind::Star, i); break;
      case '/': push(Token::Kind::Slash, i); break;
      case '^': push(Token::Kind::Caret, i); break;
      case '(': push(Token::Kind::LParen, i); break;
      case ')': push(Token::Kind::RParen, i); break;
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'", i);
    }
    ++i;
  }
  out.push_back({Token::Kind::End, 0.0, "", n});
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<std::string> vars)
      : toks_(std::move(toks)), vars_(std::move(vars)) {}

  NodePtr parse() {
    NodePtr e = expr();
    if (cur().kind != Token::Kind::End)
      throw SyntaxError("unexpected trailing input", cur().offset);
    return e;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  void advance() { ++pos_; }
  bool accept(Token::Kind k) {
    if (cur().kind == k) {
      advance();
      return true;
    }
    return false;
  }
  void expect(Token::Kind k, const char* what) {
    if (!accept(k)) throw SyntaxError(std::string("expected ") + what, cur().offset);
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (accept(Token::Kind::Plus))
        e = make_binary(BinaryOp::Add, e, term());
      else if (accept(Token::Kind::Minus))
        e = make_binary(BinaryOp::Sub, e, term());
      else
        return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (accept(Token::Kind::Star))
        e = make_binary(BinaryOp::Mul, e, factor());
      else if (accept(Token::Kind::Slash))
        e = make_binary(BinaryOp::Div, e, factor());
      else
        return e;
    }
  }

  NodePtr factor() {
    if (accept(Token::Kind::Minus)) return make_unary(UnaryOp::Neg, power());
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept(Token::Kind::Caret)) return make_binary(BinaryOp::Pow, base, factor());
    return base;
  }

  NodePtr atom() {
    const Token t = cur();
    if (t.kind == Token::Kind::Number) {
      advance();
      return make_number(t.value);
    }
    if (t.kind == Token::Kind::LParen) {
      advance();
      NodePtr e = expr();
      expect(Token::Kind::RParen, "')'");
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      advance();
      if (cur().kind == Token::Kind::LParen) {
        auto fn = function_by_name(t.text);
        if (!fn) throw SyntaxError("unknown function '" + t.text + "'", t.offset);
        advance();
        NodePtr arg = expr();
        expect(Token::Kind::RParen, "')'");
        return make_unary(*fn, arg);
      }
      for (const auto& v : vars_)
        if (v == t.text) return Expr::variable(t.text).ptr();
      if (t.text == "pi" || t.text == "e") return Expr::constant(t.text).ptr();
      throw UndeclaredVariableError(t.text, t.offset);
    }
    throw SyntaxError("expected a number, variable, function call, or '('", t.offset);
  }

  std::vector<Token> toks_;
  std::vector<std::string> vars_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse_expr(const std::string& text, const std::vector<std::string>& variables) {
  detail::Parser p(detail::lex(text), variables);
  return Expr(p.parse());
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Number: return n.number < 0 ? 3 : 5;
    case Node::Kind::Constant:
    case Node::Kind::Variable:
    case Node::Kind::External: return 5;
    case Node::Kind::Unary: return n.uop == UnaryOp::Neg ? 3 : 5;
    case Node::Kind::Binary:
      switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 2;
        case BinaryOp::Pow: return 4;
      }
  }
  return 5;
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void print_node(const Node& n, std::ostream& os);

inline void print_child(const Node& c, std::ostream& os, int min_prec) {
  if (precedence(c) < min_prec) {
    os << '(';
    print_node(c, os);
    os << ')';
  } else {
    print_node(c, os);
  }
}

inline void print_node(const Node& n, std::ostream& os) {
  switch (n.kind) {
    case Node::Kind::Number: os << format_number(n.number); return;
    case Node::Kind::Constant:
    case Node::Kind::Variable:
    case Node::Kind::External: os << n.name; return;
    case Node::Kind::Unary:
      if (n.uop == UnaryOp::Neg) {
        os << '-';
        print_child(*n.a, os, 3);
      } else {
        os << unary_name(n.uop) << '(';
        print_node(*n.a, os);
        os << ')';
      }
      return;
    case Node::Kind::Binary: {
      const char* sym = "+";
      int prec = precedence(n);
      switch (n.bop) {
        case BinaryOp::Add: sym = "+"; break;
        case BinaryOp::Sub: sym = "-"; break;
        case BinaryOp::Mul: sym = "*"; break;
        case BinaryOp::Div: sym = "/"; break;
        case BinaryOp::Pow: sym = "^"; break;
      }
      if (n.bop == BinaryOp::Pow) {
        print_child(*n.a, os, 5);  // base must be an atom
        os << sym;
        print_child(*n.b, os, 3);  // exponent may be a signed factor
      } else {
        print_child(*n.a, os, prec);
        os << sym;
        print_child(*n.b, os, prec + 1);
      }
      return;
    }
  }
}

}  // namespace detail

// 17 significant digits: round-trips any double and keeps reports
// reproducible byte for byte.
inline std::string format_number(double v) { return detail::format_number(v); }

inline std::string to_text(const Expr& e) {
  std::ostringstream os;
  detail::print_node(e.node(), os);
  return os.str();
}

inline bool structurally_equal(const Expr& x, const Expr& y) {
  const detail::Node& a = x.node();
  const detail::Node& b = y.node();
  if (a.kind != b.kind) return false;
  using K = detail::Node::Kind;
  switch (a.kind) {
    case K::Number: return a.number == b.number;
    case K::Constant:
    case K::Variable:
    case K::External: return a.name == b.name;
    case K::Unary:
      return a.uop == b.uop && structurally_equal(Expr(a.a), Expr(b.a));
    case K::Binary:
      return a.bop == b.bop && structurally_equal(Expr(a.a), Expr(b.a)) &&
             structurally_equal(Expr(a.b), Expr(b.b));
  }
  return false;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace detail {

inline NodePtr diff(const NodePtr& n, const std::string& var) {
  using K = Node::Kind;
  switch (n->kind) {
    case K::Number:
    case K::Constant: return make_number(0.0);
    case K::Variable: return make_number(n->name == var ? 1.0 : 0.0);
    case K::External:
      return n->external_var == var ? n->external_deriv : make_number(0.0);
    case K::Unary: {
      NodePtr f = n->a;
      NodePtr fp = diff(f, var);
      switch (n->uop) {
        case UnaryOp::Neg: return make_unary(UnaryOp::Neg, fp);
        case UnaryOp::Exp: return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Exp, f), fp);
        case UnaryOp::Ln: return make_binary(BinaryOp::Div, fp, f);
        case UnaryOp::Sqrt:
          return make_binary(BinaryOp::Div, fp,
                             make_binary(BinaryOp::Mul, make_number(2.0),
                                         make_unary(UnaryOp::Sqrt, f)));
        case UnaryOp::Sin: return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Cos, f), fp);
        case UnaryOp::Cos:
          return make_unary(UnaryOp::Neg,
                            make_binary(BinaryOp::Mul, make_unary(UnaryOp::Sin, f), fp));
        case UnaryOp::Tan:
          return make_binary(
              BinaryOp::Div, fp,
              make_binary(BinaryOp::Pow, make_unary(UnaryOp::Cos, f), make_number(2.0)));
        case UnaryOp::Sinh: return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Cosh, f), fp);
        case UnaryOp::Cosh: return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Sinh, f), fp);
        case UnaryOp::Tanh:
          return make_binary(
              BinaryOp::Div, fp,
              make_binary(BinaryOp::Pow, make_unary(UnaryOp::Cosh, f), make_number(2.0)));
        case UnaryOp::Coth:
          return make_unary(
              UnaryOp::Neg,
              make_binary(BinaryOp::Div, fp,
                          make_binary(BinaryOp::Pow, make_unary(UnaryOp::Sinh, f),
                                      make_number(2.0))));
        case UnaryOp::Abs:
          // d|f| = f f' / |f|, with the genuine pole at f = 0.
          return make_binary(BinaryOp::Div, make_binary(BinaryOp::Mul, f, fp),
                             make_unary(UnaryOp::Abs, f));
      }
      return make_number(0.0);
    }
    case K::Binary: {
      NodePtr f = n->a, g = n->b;
      NodePtr fp = diff(f, var), gp = diff(g, var);
      switch (n->bop) {
        case BinaryOp::Add: return make_binary(BinaryOp::Add, fp, gp);
        case BinaryOp::Sub: return make_binary(BinaryOp::Sub, fp, gp);
        case BinaryOp::Mul:
          return make_binary(BinaryOp::Add, make_binary(BinaryOp::Mul, fp, g),
                             make_binary(BinaryOp::Mul, f, gp));
        case BinaryOp::Div:
          return make_binary(
              BinaryOp::Div,
              make_binary(BinaryOp::Sub, make_binary(BinaryOp::Mul, fp, g),
                          make_binary(BinaryOp::Mul, f, gp)),
              make_binary(BinaryOp::Pow, g, make_number(2.0)));
        case BinaryOp::Pow:
          if (g->kind == K::Number) {
            // n f^(n-1) f'
            return make_binary(
                BinaryOp::Mul,
                make_binary(BinaryOp::Mul, make_number(g->number),
                            make_binary(BinaryOp::Pow, f, make_number(g->number - 1.0))),
                fp);
          }
          // f^g (g' ln f + g f'/f)
          return make_binary(
              BinaryOp::Mul, make_binary(BinaryOp::Pow, f, g),
              make_binary(BinaryOp::Add,
                          make_binary(BinaryOp::Mul, gp, make_unary(UnaryOp::Ln, f)),
                          make_binary(BinaryOp::Div, make_binary(BinaryOp::Mul, g, fp), f)));
      }
      return make_number(0.0);
    }
  }
  return make_number(0.0);
}

}  // namespace detail

inline Expr differentiate(const Expr& e, const std::string& var) {
  return Expr(detail::diff(e.ptr(), var));
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

struct EvalState {
  const EvalPoint* point;
  double scale = 0.0;   // max |operand| over additive nodes, plus |root|
  bool track = false;
  const Node* pole = nullptr;
};

inline double eval_node(const Node& n, EvalState& st);

inline double finish(const Node& n, EvalState& st, double v) {
  if (!std::isfinite(v)) {
    if (!st.pole) st.pole = &n;
    return std::numeric_limits<double>::quiet_NaN();
  }
  return v;
}

inline double eval_node(const Node& n, EvalState& st) {
  using K = Node::Kind;
  switch (n.kind) {
    case K::Number: return n.number;
    case K::Constant: return n.number;
    case K::Variable: {
      auto v = st.point->get(n.name);
      if (!v) throw Error("evaluation point does not bind variable '" + n.name + "'");
      return *v;
    }
    case K::External: {
      auto v = st.point->get(n.external_var);
      if (!v) throw Error("evaluation point does not bind variable '" + n.external_var + "'");
      return finish(n, st, n.external_fn(*v));
    }
    case K::Unary: {
      double a = eval_node(*n.a, st);
      if (st.pole) return a;
      switch (n.uop) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Exp: return finish(n, st, std::exp(a));
        case UnaryOp::Ln:
          if (a <= 0.0) {
            st.pole = &n;
            return std::numeric_limits<double>::quiet_NaN();
          }
          return finish(n, st, std::log(a));
        case UnaryOp::Sqrt:
          if (a < 0.0) {
            st.pole = &n;
            return std::numeric_limits<double>::quiet_NaN();
          }
          return finish(n, st, std::sqrt(a));
        case UnaryOp::Sin: return finish(n, st, std::sin(a));
        case UnaryOp::Cos: return finish(n, st, std::cos(a));
        case UnaryOp::Tan: return finish(n, st, std::tan(a));
        case UnaryOp::Sinh: return finish(n, st, std::sinh(a));
        case UnaryOp::Cosh: return finish(n, st, std::cosh(a));
        case UnaryOp::Tanh: return finish(n, st, std::tanh(a));
        case UnaryOp::Coth: {
          double s = std::sinh(a);
          if (s == 0.0) {
            st.pole = &n;
            return std::numeric_limits<double>::quiet_NaN();
          }
          return finish(n, st, std::cosh(a) / s);
        }
        case UnaryOp::Abs: return std::fabs(a);
      }
      return 0.0;
    }
    case K::Binary: {
      double a = eval_node(*n.a, st);
      if (st.pole) return a;
      double b = eval_node(*n.b, st);
      if (st.pole) return b;
      switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          if (st.track) st.scale = std::max({st.scale, std::fabs(a), std::fabs(b)});
          return finish(n, st, n.bop == BinaryOp::Add ? a + b : a - b);
        case BinaryOp::Mul: return finish(n, st, a * b);
        case BinaryOp::Div:
          if (b == 0.0) {
            st.pole = &n;
            return std::numeric_limits<double>::quiet_NaN();
          }
          return finish(n, st, a / b);
        case BinaryOp::Pow: {
          if (a == 0.0 && b < 0.0) {
            st.pole = &n;
            return std::numeric_limits<double>::quiet_NaN();
          }
          if (a < 0.0 && b != std::floor(b)) {
            st.pole = &n;
            return std::numeric_limits<double>::quiet_NaN();
          }
          return finish(n, st, std::pow(a, b));
        }
      }
      return 0.0;
    }
  }
  return 0.0;
}

}  // namespace detail

inline EvalResult evaluate(const Expr& e, const EvalPoint& point) {
  detail::EvalState st;
  st.point = &point;
  double v = detail::eval_node(e.node(), st);
  EvalResult r;
  if (st.pole) {
    r.pole = true;
    std::ostringstream os;
    detail::print_node(*st.pole, os);
    r.pole_at = os.str();
  } else {
    r.value = v;
  }
  return r;
}

// Evaluation that also reports the magnitude scale used by the zero test:
// the largest |operand| of any addition/subtraction encountered, together
// with |value| itself.
inline EvalResult evaluate_scaled(const Expr& e, const EvalPoint& point, double& scale_out) {
  detail::EvalState st;
  st.point = &point;
  st.track = true;
  double v = detail::eval_node(e.node(), st);
  EvalResult r;
  if (st.pole) {
    r.pole = true;
    std::ostringstream os;
    detail::print_node(*st.pole, os);
    r.pole_at = os.str();
    scale_out = st.scale;
  } else {
    r.value = v;
    scale_out = std::max(st.scale, std::fabs(v));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Low-discrepancy sampling and the probabilistic zero test

struct Box {
  struct Range {
    std::string name;
    double lo, hi;
  };
  std::vector<Range> ranges;
  Box& add(const std::string& name, double lo, double hi) {
    ranges.push_back({name, lo, hi});
    return *this;
  }
};

// Additive-recurrence quasrandom sequence; the generator constant is the
// positive root of x^(d+1) = x + 1.
class QuasiRandom {
 public:
  explicit QuasiRandom(std::size_t dims, unsigned seed = 1) : state_(dims) {
    double phi = 2.0;
    for (int i = 0; i < 64; ++i) phi = std::pow(1.0 + phi, 1.0 / (double(dims) + 1.0));
    alpha_.resize(dims);
    double a = 1.0;
    for (std::size_t i = 0; i < dims; ++i) {
      a /= phi;
      alpha_[i] = a - std::floor(a);
      double s = 0.5 + (double(seed) * 0.61803398874989484820 * double(i + 1));
      state_[i] = s - std::floor(s);
    }
  }
  const std::vector<double>& next() {
    for (std::size_t i = 0; i < state_.size(); ++i) {
      state_[i] += alpha_[i];
      if (state_[i] >= 1.0) state_[i] -= 1.0;
    }
    return state_;
  }

 private:
  std::vector<double> alpha_;
  std::vector<double> state_;
};

struct ZeroTestOptions {
  int trials = 64;
  double tol = 1e-9;
  unsigned seed = 1;
};

struct ZeroTestReport {
  bool zero = false;
  double max_scaled = 0.0;  // max over accepted points of |e| / (1 + scale)
  int accepted = 0;
  int poles = 0;
  int attempts = 0;
};

inline ZeroTestReport zero_test(const Expr& e, const Box& box, const ZeroTestOptions& opts = {}) {
  if (opts.trials <= 0) throw DomainError("zero test needs a positive trial count");
  QuasiRandom qr(box.ranges.size(), opts.seed);
  ZeroTestReport rep;
  const int cap = 20 * opts.trials + 100;
  EvalPoint p;
  while (rep.accepted < opts.trials && rep.attempts < cap) {
    const auto& u = qr.next();
    for (std::size_t i = 0; i < box.ranges.size(); ++i) {
      const auto& r = box.ranges[i];
      p.set(r.name, r.lo + (r.hi - r.lo) * u[i]);
    }
    ++rep.attempts;
    double scale = 0.0;
    EvalResult res = evaluate_scaled(e, p, scale);
    if (res.pole) {
      ++rep.poles;
      continue;
    }
    ++rep.accepted;
    rep.max_scaled = std::max(rep.max_scaled, std::fabs(res.value) / (1.0 + scale));
  }
  if (rep.accepted < opts.trials || rep.poles > 0.9 * rep.attempts)
    throw InconclusiveError("zero test inconclusive: " + std::to_string(rep.poles) + " of " +
                            std::to_string(rep.attempts) + " sample draws hit poles");
  rep.zero = rep.max_scaled <= opts.tol;
  return rep;
}

inline bool is_identically_zero(const Expr& e, const Box& box, const ZeroTestOptions& opts = {}) {
  return zero_test(e, box, opts).zero;
}

}  // namespace nws
