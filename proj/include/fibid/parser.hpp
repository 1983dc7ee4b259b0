#pragma once

// Recursive-descent parser for the identity grammar:
//
//   identity := expr "=" expr
//   expr     := ["-"] term (("+"|"-") term)*
//   term     := factor ("*" factor)*
//   factor   := base ("^" UINT)?
//   base     := "F" "[" index "]" | "L" "[" index "]" | "G" "(" rat "," rat ")" "[" index "]"
//             | "(-1)" "^" "(" index ")" | rat | "(" expr ")"
//             | "sum" "(" VAR "=" INT ".." index "," expr ")"
//   index    := ["-"] iterm (("+"|"-") iterm)*      iterm := INT ["*" VAR] | VAR
//   rat      := INT ("/" UINT)?
//
// A term whose first factor is a bare rational literal becomes Scale(c, rest);
// a leading unary minus folds into such a literal. This keeps print/parse an
// exact round trip.

#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fibid/errors.hpp"
#include "fibid/expr.hpp"

namespace fibid {

class ParseError : public UsageError {
 public:
  ParseError(int line, int column, std::set<std::string> expected, std::string found)
      : UsageError(format(line, column, expected, found)),
        line_(line),
        column_(column),
        expected_(std::move(expected)),
        found_(std::move(found)) {}

  int line() const { return line_; }
  int column() const { return column_; }
  const std::set<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  static std::string format(int line, int column, const std::set<std::string>& expected, const std::string& found) {
    std::string s = "syntax error at " + std::to_string(line) + ":" + std::to_string(column) + ": found " + found;
    if (!expected.empty()) {
      s += ", expected one of:";
      for (const auto& e : expected) s += " " + e;
    }
    return s;
  }

  int line_;
  int column_;
  std::set<std::string> expected_;
  std::string found_;
};

namespace detail {

enum class Tok { Ident, Int, Plus, Minus, Star, Slash, Caret, LParen, RParen, LBracket, RBracket, Comma, Equals, DotDot, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

inline std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Ident: return "identifier '" + t.text + "'";
    case Tok::Int: return "number '" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const int tl = line, tc = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    if (c == '.' && i + 1 < src.size() && src[i + 1] == '.') {
      out.push_back({Tok::DotDot, "..", tl, tc});
      advance(2);
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '[': k = Tok::LBracket; break;
      case ']': k = Tok::RBracket; break;
      case ',': k = Tok::Comma; break;
      case '=': k = Tok::Equals; break;
      default:
        throw ParseError(tl, tc, {}, "unexpected character '" + std::string(1, c) + "'");
    }
    out.push_back({k, std::string(1, c), tl, tc});
    advance(1);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

inline bool reserved(std::string_view name) { return name == "F" || name == "L" || name == "G" || name == "sum"; }

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  Identity identity() {
    Expr lhs = expr();
    expect(Tok::Equals, "'='");
    Expr rhs = expr();
    expect(Tok::End, "end of input");
    return Identity{"", {}, std::move(lhs), std::move(rhs)};
  }

  Expr whole_expr() {
    Expr e = expr();
    expect(Tok::End, "end of input");
    return e;
  }

  LinearIndex whole_index() {
    LinearIndex li = index();
    expect(Tok::End, "end of input");
    return li;
  }

 private:
  struct TermResult {
    Expr expr;
    bool leading_rat = false;  // first factor was a bare rational literal
  };

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool at(Tok k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(std::set<std::string> expected) const {
    const Token& t = peek();
    throw ParseError(t.line, t.column, std::move(expected), describe(t));
  }
  const Token& expect(Tok k, const std::string& what) {
    if (!at(k)) fail({what});
    return take();
  }

  static std::int64_t to_int(const Token& t) {
    try {
      return std::stoll(t.text);
    } catch (const std::out_of_range&) {
      throw ParseError(t.line, t.column, {"integer within 64 bits"}, describe(t));
    }
  }

  Expr expr() {
    bool negate = false;
    if (at(Tok::Minus)) {
      take();
      negate = true;
    }
    TermResult first = term();
    Expr acc = first.expr;
    if (negate) {
      if (first.leading_rat) {
        if (auto* s = std::get_if<ScaleNode>(&acc.node().v)) acc = Expr::scale(-s->factor, s->arg);
        else acc = Expr::constant(-std::get<AtomNode>(acc.node().v).atom.value);
      } else {
        acc = Expr::neg(acc);
      }
    }
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const bool plus = take().kind == Tok::Plus;
      Expr rhs = term().expr;
      acc = plus ? Expr::add(acc, rhs) : Expr::sub(acc, rhs);
    }
    return acc;
  }

  TermResult term() {
    std::vector<std::pair<Expr, bool>> factors;
    factors.push_back(factor());
    while (at(Tok::Star)) {
      take();
      factors.push_back(factor());
    }
    return {build(factors, 0), factors[0].second};
  }

  static Expr build(const std::vector<std::pair<Expr, bool>>& f, std::size_t i) {
    if (f[i].second && i + 1 < f.size()) {
      return Expr::scale(std::get<AtomNode>(f[i].first.node().v).atom.value, build(f, i + 1));
    }
    Expr acc = f[i].first;
    for (std::size_t k = i + 1; k < f.size(); ++k) acc = Expr::mul(acc, f[k].first);
    return acc;
  }

  // Returns the factor and whether it is a bare rational literal.
  std::pair<Expr, bool> factor() {
    auto [b, bare_rat] = base();
    if (at(Tok::Caret)) {
      take();
      const Token& t = expect(Tok::Int, "exponent");
      const std::int64_t e = to_int(t);
      if (e > 1000) throw ParseError(t.line, t.column, {"exponent <= 1000"}, describe(t));
      return {Expr::pow(b, static_cast<unsigned>(e)), false};
    }
    return {b, bare_rat};
  }

  bool sign_pow_ahead() const {
    return at(Tok::LParen) && at(Tok::Minus, 1) && at(Tok::Int, 2) && peek(2).text == "1" && at(Tok::RParen, 3) &&
           at(Tok::Caret, 4) && at(Tok::LParen, 5);
  }

  std::pair<Expr, bool> base() {
    if (at(Tok::Ident)) {
      const Token& t = peek();
      if (t.text == "F" || t.text == "L") {
        take();
        expect(Tok::LBracket, "'['");
        LinearIndex li = index();
        expect(Tok::RBracket, "']'");
        return {t.text == "F" ? F(std::move(li)) : L(std::move(li)), false};
      }
      if (t.text == "G") {
        take();
        expect(Tok::LParen, "'('");
        Scalar s0 = signed_rat();
        expect(Tok::Comma, "','");
        Scalar s1 = signed_rat();
        expect(Tok::RParen, "')'");
        expect(Tok::LBracket, "'['");
        LinearIndex li = index();
        expect(Tok::RBracket, "']'");
        return {Expr::atom(Atom::gen_fib(std::move(s0), std::move(s1), std::move(li))), false};
      }
      if (t.text == "sum") return {sum(), false};
      fail({"F", "L", "G", "sum", "(-1)^(", "number", "("});
    }
    if (sign_pow_ahead()) {
      for (int k = 0; k < 6; ++k) take();
      LinearIndex li = index();
      expect(Tok::RParen, "')'");
      return {sign_pow(std::move(li)), false};
    }
    if (at(Tok::Int)) return {Expr::constant(rat()), true};
    if (at(Tok::LParen)) {
      take();
      Expr e = expr();
      expect(Tok::RParen, "')'");
      return {e, false};
    }
    fail({"F", "L", "G", "sum", "(-1)^(", "number", "("});
  }

  Scalar rat() {
    const Token& n = expect(Tok::Int, "number");
    Scalar v{Integer(n.text)};
    if (at(Tok::Slash)) {
      take();
      const Token& d = expect(Tok::Int, "denominator");
      Integer den(d.text);
      if (den == 0) throw ParseError(d.line, d.column, {"nonzero denominator"}, describe(d));
      v /= Scalar(den);
    }
    return v;
  }

  Scalar signed_rat() {
    bool neg = false;
    if (at(Tok::Minus)) {
      take();
      neg = true;
    }
    Scalar v = rat();
    return neg ? Scalar(-v) : v;
  }

  Expr sum() {
    take();  // "sum"
    expect(Tok::LParen, "'('");
    const Token& var = expect(Tok::Ident, "variable");
    if (reserved(var.text)) throw ParseError(var.line, var.column, {"variable"}, describe(var));
    expect(Tok::Equals, "'='");
    bool neg = false;
    if (at(Tok::Minus)) {
      take();
      neg = true;
    }
    const std::int64_t lower = to_int(expect(Tok::Int, "integer lower limit")) * (neg ? -1 : 1);
    expect(Tok::DotDot, "'..'");
    const Token& upper_tok = peek();
    LinearIndex upper = index();
    expect(Tok::Comma, "','");
    Expr body = expr();
    expect(Tok::RParen, "')'");
    try {
      return Expr::sum(var.text, lower, std::move(upper), std::move(body));
    } catch (const UsageError& e) {
      throw ParseError(upper_tok.line, upper_tok.column, {"upper limit of the form VAR+INT"}, e.what());
    }
  }

  LinearIndex index() {
    LinearIndex acc;
    bool negative = false;
    if (at(Tok::Minus)) {
      take();
      negative = true;
    }
    acc = acc + (negative ? -1 : 1) * index_term();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const bool plus = take().kind == Tok::Plus;
      acc = acc + (plus ? 1 : -1) * index_term();
    }
    return acc;
  }

  LinearIndex index_term() {
    if (at(Tok::Int)) {
      const std::int64_t k = to_int(take());
      if (at(Tok::Star)) {
        take();
        return LinearIndex::variable(variable(), k);
      }
      return LinearIndex(k);
    }
    if (at(Tok::Ident)) return LinearIndex::variable(variable());
    fail({"integer", "variable"});
  }

  std::string variable() {
    const Token& t = expect(Tok::Ident, "variable");
    if (reserved(t.text)) throw ParseError(t.line, t.column, {"variable"}, describe(t));
    return t.text;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline void check_variables(const Identity& id, const std::vector<std::string>& declared) {
  for (const auto& v : free_vars(id))
    if (std::find(declared.begin(), declared.end(), v) == declared.end())
      throw UsageError("unknown variable '" + v + "' (not in the declared variable list)");
}

}  // namespace detail

/// Parses "lhs = rhs". Without an explicit variable list the variables are
/// taken in order of first appearance; with one, every free variable must be
/// listed.
inline Identity parse_identity(std::string_view text, std::optional<std::vector<std::string>> variables = std::nullopt,
                               std::string name = {}) {
  Identity id = detail::Parser(text).identity();
  id.name = std::move(name);
  if (variables) {
    detail::check_variables(id, *variables);
    id.variables = std::move(*variables);
  } else {
    id.variables = free_vars(id);
  }
  return id;
}

inline Expr parse_expr(std::string_view text) { return detail::Parser(text).whole_expr(); }

inline LinearIndex parse_index(std::string_view text) { return detail::Parser(text).whole_index(); }

/// Parses "m=r-n, k=k+1" into a change-of-variables map.
inline VariableMap parse_variable_map(std::string_view text) {
  VariableMap out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    std::string_view item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw UsageError("variable mapping item lacks '=': '" + std::string(item) + "'");
    std::string_view lhs = item.substr(0, eq);
    const std::string_view rhs = item.substr(eq + 1);
    while (!lhs.empty() && std::isspace(static_cast<unsigned char>(lhs.front()))) lhs.remove_prefix(1);
    while (!lhs.empty() && std::isspace(static_cast<unsigned char>(lhs.back()))) lhs.remove_suffix(1);
    if (lhs.size() > 1 && lhs.back() == ':') lhs.remove_suffix(1);  // accept "m := ..."
    while (!lhs.empty() && std::isspace(static_cast<unsigned char>(lhs.back()))) lhs.remove_suffix(1);
    if (lhs.empty()) throw UsageError("variable mapping item lacks a variable name");
    out.insert_or_assign(std::string(lhs), parse_index(rhs));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace fibid
