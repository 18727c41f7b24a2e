#include "lagspace/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

#include "lagspace/errors.hpp"

namespace lagspace {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_constant(const ExprPtr& e, double value) {
  const auto* c = std::get_if<Constant>(&e->node);
  return c != nullptr && c->value == value;
}

const Constant* as_constant(const ExprPtr& e) { return std::get_if<Constant>(&e->node); }

bool integral(double v) { return std::nearbyint(v) == v && std::isfinite(v); }

// pow with the domain rules used by evaluate(); returns false on a domain
// violation instead of producing a NaN.
bool checked_pow(double base, double exponent, double& out) {
  if (base == 0.0 && exponent < 0.0) return false;
  if (base < 0.0 && !integral(exponent)) return false;
  out = std::pow(base, exponent);
  return true;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ExprPtr constant(double value) { return std::make_shared<Expr>(Expr{Constant{value}}); }
ExprPtr base_var(int index) { return std::make_shared<Expr>(Expr{BaseVar{index}}); }
ExprPtr fiber_var(int index) { return std::make_shared<Expr>(Expr{FiberVar{index}}); }

ExprPtr sum(std::vector<ExprPtr> terms) {
  std::vector<ExprPtr> kept;
  kept.reserve(terms.size());
  for (auto& t : terms) {
    if (!is_constant(t, 0.0)) kept.push_back(std::move(t));
  }
  if (kept.empty()) return constant(0.0);
  if (kept.size() == 1) return kept.front();
  return std::make_shared<Expr>(Expr{Sum{std::move(kept)}});
}

ExprPtr product(std::vector<ExprPtr> factors) {
  std::vector<ExprPtr> kept;
  kept.reserve(factors.size());
  for (auto& f : factors) {
    if (is_constant(f, 0.0)) return constant(0.0);
    if (!is_constant(f, 1.0)) kept.push_back(std::move(f));
  }
  if (kept.empty()) return constant(1.0);
  if (kept.size() == 1) return kept.front();
  return std::make_shared<Expr>(Expr{Product{std::move(kept)}});
}

ExprPtr quotient(ExprPtr num, ExprPtr den) {
  if (is_constant(den, 1.0)) return num;
  return std::make_shared<Expr>(Expr{Quotient{std::move(num), std::move(den)}});
}

ExprPtr power(ExprPtr base, double exponent) {
  if (exponent == 0.0) return constant(1.0);
  if (exponent == 1.0) return base;
  return std::make_shared<Expr>(Expr{Power{std::move(base), exponent}});
}

ExprPtr unary(UnaryFn fn, ExprPtr arg) {
  if (fn == UnaryFn::Neg) {
    if (const auto* c = as_constant(arg)) return constant(-c->value);
  }
  return std::make_shared<Expr>(Expr{Unary{fn, std::move(arg)}});
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over
//   expression = term { (+|-) term }
//   term       = unary { (*|/) unary }
//   unary      = - unary | power
//   power      = atom { ^ exponent }      left-associative
//   exponent   = [-] atom                 must fold to a constant
//   atom       = number | variable | fn ( expression ) | ( expression )

namespace {

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  ExprPtr run() {
    ExprPtr e = parse_expression();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int dim_;

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool match(char c) {
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

  ExprPtr parse_expression() {
    ExprPtr first = parse_term();
    std::vector<ExprPtr> terms{std::move(first)};
    for (;;) {
      if (match('+')) {
        terms.push_back(parse_term());
      } else if (match('-')) {
        terms.push_back(unary(UnaryFn::Neg, parse_term()));
      } else {
        break;
      }
    }
    if (terms.size() == 1) return terms.front();
    return std::make_shared<Expr>(Expr{Sum{std::move(terms)}});
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (match('*')) {
        ExprPtr rhs = parse_unary();
        std::vector<ExprPtr> factors;
        if (const auto* p = std::get_if<Product>(&e->node)) {
          factors = p->factors;  // keep left association flat
        } else {
          factors.push_back(e);
        }
        factors.push_back(std::move(rhs));
        e = std::make_shared<Expr>(Expr{Product{std::move(factors)}});
      } else if (match('/')) {
        ExprPtr rhs = parse_unary();
        e = std::make_shared<Expr>(Expr{Quotient{std::move(e), std::move(rhs)}});
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_unary() {
    if (match('-')) return unary(UnaryFn::Neg, parse_unary());
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    while (match('^')) {
      skip_ws();
      std::size_t exp_pos = pos_;
      bool negate = match('-');
      ExprPtr raw = parse_atom();
      ExprPtr folded = simplify(raw);
      const Constant* c = as_constant(folded);
      if (c == nullptr) {
        throw ParseError("power exponent must be a constant", exp_pos);
      }
      double exponent = negate ? -c->value : c->value;
      base = std::make_shared<Expr>(Expr{Power{std::move(base), exponent}});
    }
    return base;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_expression();
      if (!match(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == start) fail("expected a number");
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      std::size_t frac = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == frac) fail("expected digits after decimal point");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      std::size_t digits = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == digits) pos_ = mark;  // not an exponent after all
    }
    const std::string token(text_.substr(start, pos_ - start));
    try {
      return constant(std::stod(token));
    } catch (const std::out_of_range&) {
      pos_ = start;
      fail("number out of range: " + token);
    }
  }

  ExprPtr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    std::size_t digit_start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string digits(text_.substr(digit_start, pos_ - digit_start));

    if (digits.empty()) {
      if (!match('(')) {
        pos_ = start;
        fail("expected a variable like x1 or y1, or a function call");
      }
      UnaryFn fn;
      if (name == "sin") {
        fn = UnaryFn::Sin;
      } else if (name == "cos") {
        fn = UnaryFn::Cos;
      } else if (name == "exp") {
        fn = UnaryFn::Exp;
      } else if (name == "log") {
        fn = UnaryFn::Log;
      } else if (name == "sqrt") {
        fn = UnaryFn::Sqrt;
      } else {
        pos_ = start;
        fail("unknown function name '" + name + "'");
      }
      ExprPtr arg = parse_expression();
      if (!match(')')) fail("expected ')'");
      return std::make_shared<Expr>(Expr{Unary{fn, std::move(arg)}});
    }

    if (name != "x" && name != "y") {
      pos_ = start;
      fail("unknown identifier '" + name + digits + "'");
    }
    int index = 0;
    try {
      index = std::stoi(digits);
    } catch (const std::exception&) {
      pos_ = start;
      fail("variable index out of range: " + name + digits);
    }
    if (index < 1 || index > dim_) {
      pos_ = start;
      fail("variable index out of range: " + name + digits + " with n=" + std::to_string(dim_));
    }
    return name == "x" ? base_var(index) : fiber_var(index);
  }
};

}  // namespace

ExprPtr parse_expression(std::string_view text, int dim) {
  if (dim < 1) throw ParseError("dimension must be at least 1", 0);
  return Parser(text, dim).run();
}

// ---------------------------------------------------------------------------

ExprPtr differentiate(const ExprPtr& e, Var v) {
  return std::visit(
      overloaded{
          [&](const Constant&) { return constant(0.0); },
          [&](const BaseVar& b) {
            return constant(v.kind == Var::Kind::Base && v.index == b.index ? 1.0 : 0.0);
          },
          [&](const FiberVar& f) {
            return constant(v.kind == Var::Kind::Fiber && v.index == f.index ? 1.0 : 0.0);
          },
          [&](const Sum& s) {
            std::vector<ExprPtr> terms;
            terms.reserve(s.terms.size());
            for (const auto& t : s.terms) terms.push_back(differentiate(t, v));
            return sum(std::move(terms));
          },
          [&](const Product& p) {
            std::vector<ExprPtr> terms;
            terms.reserve(p.factors.size());
            for (std::size_t k = 0; k < p.factors.size(); ++k) {
              std::vector<ExprPtr> factors = p.factors;
              factors[k] = differentiate(p.factors[k], v);
              terms.push_back(product(std::move(factors)));
            }
            return sum(std::move(terms));
          },
          [&](const Quotient& q) {
            // (u'v - u v') / v^2
            ExprPtr du = differentiate(q.num, v);
            ExprPtr dv = differentiate(q.den, v);
            ExprPtr numerator =
                sum({product({du, q.den}), unary(UnaryFn::Neg, product({q.num, dv}))});
            return quotient(std::move(numerator), power(q.den, 2.0));
          },
          [&](const Power& p) {
            ExprPtr du = differentiate(p.base, v);
            return product({constant(p.exponent), power(p.base, p.exponent - 1.0), du});
          },
          [&](const Unary& u) -> ExprPtr {
            ExprPtr da = differentiate(u.arg, v);
            switch (u.fn) {
              case UnaryFn::Neg:
                return unary(UnaryFn::Neg, da);
              case UnaryFn::Sin:
                return product({unary(UnaryFn::Cos, u.arg), da});
              case UnaryFn::Cos:
                return unary(UnaryFn::Neg, product({unary(UnaryFn::Sin, u.arg), da}));
              case UnaryFn::Exp:
                return product({unary(UnaryFn::Exp, u.arg), da});
              case UnaryFn::Log:
                return quotient(da, u.arg);
              case UnaryFn::Sqrt:
                return quotient(da, product({constant(2.0), unary(UnaryFn::Sqrt, u.arg)}));
            }
            return constant(0.0);  // unreachable
          }},
      e->node);
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void domain_fail(const std::string& what, const ExprPtr& e) {
  std::string printed = to_string(e);
  if (printed.size() > 80) printed = printed.substr(0, 77) + "...";
  throw EvalDomainError(what + " in '" + printed + "'");
}

}  // namespace

double evaluate(const ExprPtr& e, const TangentPoint& u) {
  return std::visit(
      overloaded{
          [&](const Constant& c) { return c.value; },
          [&](const BaseVar& b) {
            if (b.index > u.dim()) throw std::invalid_argument("point dimension too small for x index");
            return u.x(b.index - 1);
          },
          [&](const FiberVar& f) {
            if (f.index > u.dim()) throw std::invalid_argument("point dimension too small for y index");
            return u.y(f.index - 1);
          },
          [&](const Sum& s) {
            double acc = 0.0;
            for (const auto& t : s.terms) acc += evaluate(t, u);
            return acc;
          },
          [&](const Product& p) {
            double acc = 1.0;
            for (const auto& f : p.factors) acc *= evaluate(f, u);
            return acc;
          },
          [&](const Quotient& q) {
            double den = evaluate(q.den, u);
            if (den == 0.0) domain_fail("division by zero", e);
            return evaluate(q.num, u) / den;
          },
          [&](const Power& p) {
            double base = evaluate(p.base, u);
            double out;
            if (!checked_pow(base, p.exponent, out)) domain_fail("power outside domain", e);
            return out;
          },
          [&](const Unary& un) {
            double a = evaluate(un.arg, u);
            switch (un.fn) {
              case UnaryFn::Neg:
                return -a;
              case UnaryFn::Sin:
                return std::sin(a);
              case UnaryFn::Cos:
                return std::cos(a);
              case UnaryFn::Exp:
                return std::exp(a);
              case UnaryFn::Log:
                if (a <= 0.0) domain_fail("log of a non-positive value", e);
                return std::log(a);
              case UnaryFn::Sqrt:
                if (a < 0.0) domain_fail("sqrt of a negative value", e);
                return std::sqrt(a);
            }
            return 0.0;  // unreachable
          }},
      e->node);
}

// ---------------------------------------------------------------------------

ExprPtr simplify(const ExprPtr& e) {
  return std::visit(
      overloaded{
          [&](const Constant&) { return e; },
          [&](const BaseVar&) { return e; },
          [&](const FiberVar&) { return e; },
          [&](const Sum& s) {
            double folded = 0.0;
            std::vector<ExprPtr> rest;
            for (const auto& t : s.terms) {
              ExprPtr st = simplify(t);
              if (const auto* c = as_constant(st)) {
                folded += c->value;
              } else {
                rest.push_back(std::move(st));
              }
            }
            if (folded != 0.0) rest.push_back(constant(folded));
            return sum(std::move(rest));
          },
          [&](const Product& p) {
            double folded = 1.0;
            std::vector<ExprPtr> rest;
            for (const auto& f : p.factors) {
              ExprPtr sf = simplify(f);
              if (const auto* c = as_constant(sf)) {
                folded *= c->value;
              } else {
                rest.push_back(std::move(sf));
              }
            }
            if (folded == 0.0) return constant(0.0);
            if (folded != 1.0) rest.insert(rest.begin(), constant(folded));
            return product(std::move(rest));
          },
          [&](const Quotient& q) {
            ExprPtr num = simplify(q.num);
            ExprPtr den = simplify(q.den);
            if (is_constant(num, 0.0)) return constant(0.0);
            const Constant* cn = as_constant(num);
            const Constant* cd = as_constant(den);
            if (cn != nullptr && cd != nullptr && cd->value != 0.0) {
              return constant(cn->value / cd->value);
            }
            return quotient(std::move(num), std::move(den));
          },
          [&](const Power& p) {
            ExprPtr base = simplify(p.base);
            if (const auto* c = as_constant(base)) {
              double out;
              if (checked_pow(c->value, p.exponent, out)) return constant(out);
            }
            return power(std::move(base), p.exponent);
          },
          [&](const Unary& un) {
            ExprPtr arg = simplify(un.arg);
            if (const auto* c = as_constant(arg)) {
              switch (un.fn) {
                case UnaryFn::Neg:
                  return constant(-c->value);
                case UnaryFn::Sin:
                  return constant(std::sin(c->value));
                case UnaryFn::Cos:
                  return constant(std::cos(c->value));
                case UnaryFn::Exp:
                  return constant(std::exp(c->value));
                case UnaryFn::Log:
                  if (c->value > 0.0) return constant(std::log(c->value));
                  break;
                case UnaryFn::Sqrt:
                  if (c->value >= 0.0) return constant(std::sqrt(c->value));
                  break;
              }
            }
            return unary(un.fn, std::move(arg));
          }},
      e->node);
}

// ---------------------------------------------------------------------------
// Printer. Precedence levels: sum 0, product/quotient 1, unary minus 2,
// power 3, atoms 4. A node is parenthesized when its level is below the
// context it is printed in.

namespace {

int precedence_of(const ExprPtr& e) {
  return std::visit(overloaded{[](const Constant& c) { return c.value < 0.0 ? 2 : 4; },
                               [](const BaseVar&) { return 4; },
                               [](const FiberVar&) { return 4; },
                               [](const Sum&) { return 0; },
                               [](const Product&) { return 1; },
                               [](const Quotient&) { return 1; },
                               [](const Power&) { return 3; },
                               [](const Unary& u) { return u.fn == UnaryFn::Neg ? 2 : 4; }},
                    e->node);
}

void print(const ExprPtr& e, std::ostringstream& os, int context) {
  bool parens = precedence_of(e) < context;
  if (parens) os << '(';
  std::visit(
      overloaded{
          [&](const Constant& c) { os << format_double(c.value); },
          [&](const BaseVar& b) { os << 'x' << b.index; },
          [&](const FiberVar& f) { os << 'y' << f.index; },
          [&](const Sum& s) {
            for (std::size_t i = 0; i < s.terms.size(); ++i) {
              const ExprPtr& t = s.terms[i];
              if (i == 0) {
                print(t, os, 0);
                continue;
              }
              if (const auto* u = std::get_if<Unary>(&t->node); u && u->fn == UnaryFn::Neg) {
                os << " - ";
                print(u->arg, os, 2);
              } else {
                os << " + ";
                print(t, os, 1);
              }
            }
          },
          [&](const Product& p) {
            for (std::size_t i = 0; i < p.factors.size(); ++i) {
              if (i > 0) os << '*';
              print(p.factors[i], os, 2);
            }
          },
          [&](const Quotient& q) {
            print(q.num, os, 2);
            os << '/';
            print(q.den, os, 2);
          },
          [&](const Power& p) {
            print(p.base, os, 4);
            os << '^' << format_double(p.exponent);
          },
          [&](const Unary& u) {
            switch (u.fn) {
              case UnaryFn::Neg:
                os << '-';
                print(u.arg, os, 3);
                return;
              case UnaryFn::Sin:
                os << "sin";
                break;
              case UnaryFn::Cos:
                os << "cos";
                break;
              case UnaryFn::Exp:
                os << "exp";
                break;
              case UnaryFn::Log:
                os << "log";
                break;
              case UnaryFn::Sqrt:
                os << "sqrt";
                break;
            }
            os << '(';
            print(u.arg, os, 0);
            os << ')';
          }},
      e->node);
  if (parens) os << ')';
}

}  // namespace

std::string to_string(const ExprPtr& e) {
  std::ostringstream os;
  print(e, os, 0);
  return os.str();
}

int max_variable_index(const ExprPtr& e) {
  return std::visit(overloaded{[](const Constant&) { return 0; },
                               [](const BaseVar& b) { return b.index; },
                               [](const FiberVar& f) { return f.index; },
                               [](const Sum& s) {
                                 int m = 0;
                                 for (const auto& t : s.terms) m = std::max(m, max_variable_index(t));
                                 return m;
                               },
                               [](const Product& p) {
                                 int m = 0;
                                 for (const auto& f : p.factors) m = std::max(m, max_variable_index(f));
                                 return m;
                               },
                               [](const Quotient& q) {
                                 return std::max(max_variable_index(q.num), max_variable_index(q.den));
                               },
                               [](const Power& p) { return max_variable_index(p.base); },
                               [](const Unary& u) { return max_variable_index(u.arg); }},
                    e->node);
}

}  // namespace lagspace
