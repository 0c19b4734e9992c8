#pragma once
// Expression mini-language: the inverse of the printers in field.hpp.
// parse(str(x)) == x for every canonically printed FieldExpr; free-form input
// is canonicalized by lowering through the engine's own constructors.

#include <cctype>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "field.hpp"

namespace vaw {

// A top-level query: a plain expression, or one of the operation forms
// [a lam b], a o(n) b, a_(n) b.
using QueryResult = std::variant<FieldExpr, LambdaPoly>;

namespace detail {

struct Token {
  enum Kind { Name, Num, Sym, End } kind = End;
  std::string text;            // name base or symbol
  std::vector<long long> idx;  // attached [i] or [i,k] index list
  size_t pos = 0;              // 1-based byte offset
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : src(s) { advance(); }
  const Token& peek() const { return tok; }
  Token take() {
    Token t = tok;
    advance();
    return t;
  }

 private:
  std::string_view src;
  size_t at = 0;
  Token tok;

  [[noreturn]] void fail(const std::string& what, size_t where) const {
    throw Error("parse: " + what + " at position " + std::to_string(where + 1));
  }

  void advance() {
    while (at < src.size() && std::isspace(static_cast<unsigned char>(src[at]))) ++at;
    tok = Token{};
    tok.pos = at + 1;
    if (at >= src.size()) {
      tok.kind = Token::End;
      return;
    }
    char c = src[at];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      tok.kind = Token::Num;
      while (at < src.size() && std::isdigit(static_cast<unsigned char>(src[at])))
        tok.text += src[at++];
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      tok.kind = Token::Name;
      while (at < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[at]))))
        tok.text += src[at++];
      if (at < src.size() && src[at] == '[') {  // attached index list
        ++at;
        while (true) {
          bool neg = false;
          if (at < src.size() && src[at] == '-') neg = true, ++at;
          if (at >= src.size() || !std::isdigit(static_cast<unsigned char>(src[at])))
            fail("malformed index list", at);
          long long v = 0;
          while (at < src.size() && std::isdigit(static_cast<unsigned char>(src[at])))
            v = v * 10 + (src[at++] - '0');
          tok.idx.push_back(neg ? -v : v);
          if (at < src.size() && src[at] == ',') {
            ++at;
            continue;
          }
          if (at < src.size() && src[at] == ']') {
            ++at;
            break;
          }
          fail("malformed index list", at);
        }
      }
      return;
    }
    if (std::string("+-*/:()^_[],").find(c) != std::string::npos) {
      tok.kind = Token::Sym;
      tok.text = c;
      ++at;
      return;
    }
    fail(std::string("unexpected character '") + c + "'", at);
  }
};

}  // namespace detail

class ExprParser {
 public:
  ExprParser(const Context* c, std::string_view text) : ctx(c), lx(text) {}

  FieldExpr parseField() {
    FieldExpr r = parseSum();
    expectEnd();
    return r;
  }

  QueryResult parseQuery() {
    if (isSym("[")) {
      lx.take();
      FieldExpr a = parseSum();
      if (!(lx.peek().kind == detail::Token::Name && lx.peek().text == "lam"))
        fail("expected 'lam' in bracket query");
      lx.take();
      FieldExpr b = parseSum();
      expectSym("]");
      expectEnd();
      return bracket(a, b);
    }
    FieldExpr a = parseSum();
    if (lx.peek().kind == detail::Token::Name && lx.peek().text == "o") {
      lx.take();
      int n = parseIntArg();
      FieldExpr b = parseSum();
      expectEnd();
      return circle(a, n, b);
    }
    if (isSym("_")) {
      lx.take();
      int n = parseIntArg();
      FieldExpr b = parseSum();
      expectEnd();
      return modeApply(a, n, b);
    }
    expectEnd();
    return a;
  }

 private:
  const Context* ctx;
  detail::Lexer lx;

  [[noreturn]] void fail(const std::string& what) const {
    throw Error("parse: " + what + " at position " + std::to_string(lx.peek().pos));
  }
  bool isSym(const char* s) const {
    return lx.peek().kind == detail::Token::Sym && lx.peek().text == s;
  }
  void expectSym(const char* s) {
    if (!isSym(s)) fail(std::string("expected '") + s + "'");
    lx.take();
  }
  void expectEnd() {
    if (lx.peek().kind != detail::Token::End) fail("trailing input");
  }

  int parseIntArg() {  // "(n)" with optional sign
    expectSym("(");
    bool neg = false;
    if (isSym("-")) neg = true, lx.take();
    if (lx.peek().kind != detail::Token::Num) fail("expected integer");
    long long v = std::stoll(lx.take().text);
    expectSym(")");
    return static_cast<int>(neg ? -v : v);
  }

  FieldExpr parseSum() {
    FieldExpr r = parseProduct();
    while (isSym("+") || isSym("-")) {
      bool minus = lx.take().text == "-";
      FieldExpr t = parseProduct();
      r = minus ? r - t : r + t;
    }
    return r;
  }

  FieldExpr parseProduct() {
    FieldExpr r = parseSigned();
    while (isSym("*")) {
      lx.take();
      r = wick(r, parseSigned());
    }
    return r;
  }

  FieldExpr parseSigned() {
    if (isSym("-")) {
      lx.take();
      return parseSigned() * Scalar(-1);
    }
    if (lx.peek().kind == detail::Token::Name && lx.peek().text == "d" &&
        lx.peek().idx.empty()) {
      // derivative prefix d^k
      lx.take();
      expectSym("^");
      if (lx.peek().kind != detail::Token::Num) fail("expected derivative order");
      int k = static_cast<int>(std::stoll(lx.take().text));
      return derivative(parseSigned(), k);
    }
    return parseAtom();
  }

  FieldExpr parseAtom() {
    const detail::Token& t = lx.peek();
    if (isSym("(")) {
      lx.take();
      FieldExpr r = parseSum();
      expectSym(")");
      return r;
    }
    if (isSym(":")) {
      size_t open = t.pos;
      lx.take();
      std::vector<FieldExpr> elems;
      while (!isSym(":")) {
        if (lx.peek().kind == detail::Token::End)
          throw Error("parse: unbalanced normal-order delimiter at position " +
                      std::to_string(open));
        elems.push_back(parseProduct());
      }
      lx.take();
      if (elems.empty()) fail("empty normal-order group");
      return wickChain(elems);
    }
    if (t.kind == detail::Token::Num) {
      Rat num(lx.take().text);
      if (isSym("/")) {
        lx.take();
        if (lx.peek().kind != detail::Token::Num) fail("expected denominator");
        Rat den(lx.take().text);
        if (den == 0) fail("division by zero");
        num /= den;
      }
      return FieldExpr::unit(ctx) * Scalar(num);
    }
    if (t.kind == detail::Token::Name) {
      if (t.text == "i" && t.idx.empty()) {
        lx.take();
        return FieldExpr::unit(ctx) * Scalar::i();
      }
      if (t.text == "exp" && t.idx.empty()) return parseFourier();
      return parseNamed();
    }
    fail("unexpected token");
  }

  // exp(i*theta1), exp(-i*2*theta1)
  FieldExpr parseFourier() {
    lx.take();
    expectSym("(");
    int sign = 1;
    if (isSym("-")) sign = -1, lx.take();
    if (!(lx.peek().kind == detail::Token::Name && lx.peek().text == "i" &&
          lx.peek().idx.empty()))
      fail("expected 'i' in exponential");
    lx.take();
    expectSym("*");
    long long k = 1;
    if (lx.peek().kind == detail::Token::Num) {
      k = std::stoll(lx.take().text);
      expectSym("*");
    }
    if (lx.peek().kind != detail::Token::Name) fail("expected angular coordinate");
    detail::Token name = lx.take();
    std::string rendered = renderName(name);
    const auto& cs = ctx->coords;
    for (size_t u = 0; u < cs->size(); ++u)
      if (!cs->isFlat(u) && cs->names[u] == rendered) {
        expectSym(")");
        return FieldExpr::fromCoeff(ctx, CoeffFn::fourier(cs, static_cast<int>(u),
                                                          static_cast<int>(sign * k)));
      }
    throw Error("parse: unknown angular coordinate '" + rendered + "' at position " +
                std::to_string(name.pos));
  }

  static std::string renderName(const detail::Token& t) {
    std::string s = t.text;
    if (!t.idx.empty()) {
      s += "[" + std::to_string(t.idx[0]);
      for (size_t j = 1; j < t.idx.size(); ++j) s += "," + std::to_string(t.idx[j]);
      s += "]";
    }
    return s;
  }

  // generator reference or flat-coordinate literal (with optional ^exponent)
  FieldExpr parseNamed() {
    detail::Token t = lx.take();
    std::string rendered = renderName(t);

    // jet shorthand dgamma[i,k] / dtheta[i,k]: k-th derivative of the coordinate
    std::string lookup = rendered;
    int extraD = 0;
    if (t.idx.size() == 2) {
      if (t.idx[1] < 2) fail("jet order must be at least 2");
      lookup = t.text + "[" + std::to_string(t.idx[0]) + "]";
      extraD = static_cast<int>(t.idx[1]) - 1;
    }
    for (size_t g = 0; g < ctx->gens.size(); ++g)
      if (ctx->gens[g].name == lookup) {
        if (extraD > 0 && ctx->gens[g].jetCoord < 0)
          fail("two-index form is only for coordinate jets");
        return FieldExpr::generator(ctx, static_cast<int>(g), extraD);
      }

    const auto& cs = ctx->coords;
    for (size_t u = 0; u < cs->size(); ++u)
      if (cs->isFlat(u) && cs->names[u] == rendered) {
        CoeffFn f = CoeffFn::coord(cs, static_cast<int>(u));
        if (isSym("^")) {
          lx.take();
          if (lx.peek().kind != detail::Token::Num) fail("expected exponent");
          long long p = std::stoll(lx.take().text);
          if (p < 1) fail("exponent must be positive");
          CoeffFn r = f;
          for (long long j = 1; j < p; ++j) r = r * f;
          f = r;
        }
        return FieldExpr::fromCoeff(ctx, f);
      }

    throw Error("parse: unknown generator '" + rendered + "' at position " +
                std::to_string(t.pos));
  }
};

inline FieldExpr parseField(const Context* c, std::string_view text) {
  return ExprParser(c, text).parseField();
}

inline QueryResult parseQuery(const Context* c, std::string_view text) {
  return ExprParser(c, text).parseQuery();
}

}  // namespace vaw
