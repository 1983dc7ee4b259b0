#pragma once

// Expression language over Fibonacci-type atoms with linear integer indices.
//
// Expressions are immutable trees of shared nodes. Evaluation is exact and
// total on all integer assignments: negative Fibonacci/Lucas indices run the
// two-term recurrence backwards, and sums with an upper bound below the lower
// bound follow the usual telescoping convention
//   sum(k=a..b) = -sum(k=b+1..a-1)   when b < a-1,
// so that S(b) - S(b-1) = body(b) holds for every integer b.

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fibid/errors.hpp"
#include "fibid/linalg.hpp"

namespace fibid {

using Assignment = std::map<std::string, std::int64_t, std::less<>>;

// ---------------------------------------------------------------------------
// LinearIndex

/// offset + sum(coeff[v] * v). Zero coefficients are never stored.
class LinearIndex {
 public:
  LinearIndex() = default;
  explicit LinearIndex(std::int64_t offset) : offset_(offset) {}
  static LinearIndex variable(std::string name, std::int64_t coeff = 1) {
    LinearIndex li;
    li.add_term(std::move(name), coeff);
    return li;
  }

  std::int64_t offset() const { return offset_; }
  const std::map<std::string, std::int64_t, std::less<>>& coeffs() const { return coeffs_; }
  std::int64_t coeff(std::string_view var) const {
    auto it = coeffs_.find(var);
    return it == coeffs_.end() ? 0 : it->second;
  }
  bool is_constant() const { return coeffs_.empty(); }
  bool mentions(std::string_view var) const { return coeffs_.contains(var); }

  void add_term(std::string var, std::int64_t c) {
    if (c == 0) return;
    auto [it, inserted] = coeffs_.try_emplace(std::move(var), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) coeffs_.erase(it);
    }
  }
  void add_offset(std::int64_t d) { offset_ += d; }

  friend LinearIndex operator+(LinearIndex a, const LinearIndex& b) {
    a.offset_ += b.offset_;
    for (const auto& [v, c] : b.coeffs_) a.add_term(v, c);
    return a;
  }
  friend LinearIndex operator*(std::int64_t k, LinearIndex a) {
    if (k == 0) return LinearIndex{};
    a.offset_ *= k;
    for (auto& [v, c] : a.coeffs_) c *= k;
    return a;
  }
  friend LinearIndex operator-(const LinearIndex& a, const LinearIndex& b) { return a + (-1) * b; }
  friend bool operator==(const LinearIndex&, const LinearIndex&) = default;

  std::int64_t evaluate(const Assignment& a) const {
    std::int64_t v = offset_;
    for (const auto& [name, c] : coeffs_) {
      auto it = a.find(name);
      if (it == a.end()) throw UsageError("no value assigned to variable '" + name + "'");
      v += c * it->second;
    }
    return v;
  }

  LinearIndex substitute(std::string_view var, std::int64_t value) const {
    LinearIndex out = *this;
    auto it = out.coeffs_.find(var);
    if (it != out.coeffs_.end()) {
      out.offset_ += it->second * value;
      out.coeffs_.erase(it);
    }
    return out;
  }

  /// Replaces each mapped variable by its image.
  LinearIndex remap(const std::map<std::string, LinearIndex, std::less<>>& mapping) const {
    LinearIndex out(offset_);
    for (const auto& [v, c] : coeffs_) {
      auto it = mapping.find(v);
      if (it == mapping.end()) {
        out.add_term(v, c);
      } else {
        out = out + c * it->second;
      }
    }
    return out;
  }

  /// Canonical text: variables in name order, then the offset ("2*n-r+3").
  std::string to_string() const {
    std::string s;
    for (const auto& [v, c] : coeffs_) {
      const std::int64_t mag = c < 0 ? -c : c;
      if (c < 0) s += "-";
      else if (!s.empty()) s += "+";
      if (mag != 1) s += std::to_string(mag) + "*";
      s += v;
    }
    if (offset_ != 0 || s.empty()) {
      if (offset_ >= 0 && !s.empty()) s += "+";
      s += std::to_string(offset_);
    }
    return s;
  }

 private:
  std::int64_t offset_ = 0;
  std::map<std::string, std::int64_t, std::less<>> coeffs_;
};

// ---------------------------------------------------------------------------
// Atoms

enum class AtomKind { Fib, Luc, GenFib, SignPow, Const };

/// A leaf of the expression tree. Fib and Luc are the GenFib sequences with
/// seeds (0, 1) and (2, 1); SignPow is (-1)^index; Const ignores its index.
struct Atom {
  AtomKind kind = AtomKind::Const;
  LinearIndex index;
  Scalar seed0 = 0;  // GenFib only
  Scalar seed1 = 0;  // GenFib only
  Scalar value = 0;  // Const only

  static Atom fib(LinearIndex i) { return {AtomKind::Fib, std::move(i), 0, 1, 0}; }
  static Atom luc(LinearIndex i) { return {AtomKind::Luc, std::move(i), 2, 1, 0}; }
  static Atom gen_fib(Scalar s0, Scalar s1, LinearIndex i) {
    return {AtomKind::GenFib, std::move(i), std::move(s0), std::move(s1), 0};
  }
  static Atom sign_pow(LinearIndex i) { return {AtomKind::SignPow, std::move(i), 0, 0, 0}; }
  static Atom constant(Scalar v) { return {AtomKind::Const, LinearIndex{}, 0, 0, std::move(v)}; }

  bool two_term() const { return kind == AtomKind::Fib || kind == AtomKind::Luc || kind == AtomKind::GenFib; }

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.kind == b.kind && a.index == b.index && a.seed0 == b.seed0 && a.seed1 == b.seed1 && a.value == b.value;
  }
};

// ---------------------------------------------------------------------------
// Expr

struct Node;

/// Immutable expression handle. Copies share structure.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  const Node& node() const { return *node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

  static Expr atom(Atom a);
  static Expr constant(Scalar v) { return atom(Atom::constant(std::move(v))); }
  static Expr add(Expr a, Expr b);
  static Expr sub(Expr a, Expr b);
  static Expr neg(Expr a);
  static Expr mul(Expr a, Expr b);
  static Expr pow(Expr base, unsigned exponent);
  static Expr scale(Scalar c, Expr e);
  static Expr sum(std::string bound, std::int64_t lower, LinearIndex upper, Expr body);

 private:
  std::shared_ptr<const Node> node_;
};

struct AtomNode { Atom atom; };
struct AddNode { Expr lhs, rhs; };
struct SubNode { Expr lhs, rhs; };
struct NegNode { Expr arg; };
struct MulNode { Expr lhs, rhs; };
struct PowNode { Expr base; unsigned exponent; };
struct ScaleNode { Scalar factor; Expr arg; };
struct SumNode {
  std::string bound;
  std::int64_t lower;
  LinearIndex upper;
  Expr body;
};

struct Node {
  std::variant<AtomNode, AddNode, SubNode, NegNode, MulNode, PowNode, ScaleNode, SumNode> v;
};

inline Expr Expr::atom(Atom a) { return Expr(std::make_shared<const Node>(Node{AtomNode{std::move(a)}})); }
inline Expr Expr::add(Expr a, Expr b) { return Expr(std::make_shared<const Node>(Node{AddNode{std::move(a), std::move(b)}})); }
inline Expr Expr::sub(Expr a, Expr b) { return Expr(std::make_shared<const Node>(Node{SubNode{std::move(a), std::move(b)}})); }
inline Expr Expr::neg(Expr a) { return Expr(std::make_shared<const Node>(Node{NegNode{std::move(a)}})); }
inline Expr Expr::mul(Expr a, Expr b) { return Expr(std::make_shared<const Node>(Node{MulNode{std::move(a), std::move(b)}})); }
inline Expr Expr::pow(Expr base, unsigned exponent) {
  return Expr(std::make_shared<const Node>(Node{PowNode{std::move(base), exponent}}));
}
inline Expr Expr::scale(Scalar c, Expr e) {
  return Expr(std::make_shared<const Node>(Node{ScaleNode{std::move(c), std::move(e)}}));
}

/// The upper bound must be constant or one variable with coefficient 1 plus
/// an offset, and must not mention the bound variable.
inline Expr Expr::sum(std::string bound, std::int64_t lower, LinearIndex upper, Expr body) {
  if (upper.mentions(bound)) throw UsageError("sum bound variable '" + bound + "' appears in its own upper limit");
  if (upper.coeffs().size() > 1 || (upper.coeffs().size() == 1 && upper.coeffs().begin()->second != 1))
    throw UsageError("sum upper limit must be a single variable plus an integer offset, got " + upper.to_string());
  return Expr(std::make_shared<const Node>(Node{SumNode{std::move(bound), lower, std::move(upper), std::move(body)}}));
}

inline Expr F(LinearIndex i) { return Expr::atom(Atom::fib(std::move(i))); }
inline Expr L(LinearIndex i) { return Expr::atom(Atom::luc(std::move(i))); }
inline Expr sign_pow(LinearIndex i) { return Expr::atom(Atom::sign_pow(std::move(i))); }

bool operator==(const Expr& a, const Expr& b);

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

inline bool operator==(const Expr& a, const Expr& b) {
  if (&a.node() == &b.node()) return true;
  const auto& x = a.node().v;
  const auto& y = b.node().v;
  if (x.index() != y.index()) return false;
  return std::visit(
      detail::overloaded{
          [&](const AtomNode& n) { return n.atom == std::get<AtomNode>(y).atom; },
          [&](const AddNode& n) { const auto& m = std::get<AddNode>(y); return n.lhs == m.lhs && n.rhs == m.rhs; },
          [&](const SubNode& n) { const auto& m = std::get<SubNode>(y); return n.lhs == m.lhs && n.rhs == m.rhs; },
          [&](const NegNode& n) { return n.arg == std::get<NegNode>(y).arg; },
          [&](const MulNode& n) { const auto& m = std::get<MulNode>(y); return n.lhs == m.lhs && n.rhs == m.rhs; },
          [&](const PowNode& n) { const auto& m = std::get<PowNode>(y); return n.exponent == m.exponent && n.base == m.base; },
          [&](const ScaleNode& n) { const auto& m = std::get<ScaleNode>(y); return n.factor == m.factor && n.arg == m.arg; },
          [&](const SumNode& n) {
            const auto& m = std::get<SumNode>(y);
            return n.bound == m.bound && n.lower == m.lower && n.upper == m.upper && n.body == m.body;
          },
      },
      x);
}

inline Expr operator+(Expr a, Expr b) { return Expr::add(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return Expr::sub(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return Expr::mul(std::move(a), std::move(b)); }

// ---------------------------------------------------------------------------
// Identity

struct Identity {
  std::string name;
  std::vector<std::string> variables;
  Expr lhs;
  Expr rhs;

  Expr difference() const { return Expr::sub(lhs, rhs); }
};

// ---------------------------------------------------------------------------
// Traversal helpers

/// Applies fn to every LinearIndex reachable in e (atom indices and sum upper
/// limits), rebuilding the tree. `bound` lists variables bound by enclosing sums.
template <class Fn>
Expr map_indices(const Expr& e, Fn&& fn, std::vector<std::string>& bound) {
  return std::visit(
      detail::overloaded{
          [&](const AtomNode& n) {
            if (n.atom.kind == AtomKind::Const) return e;
            Atom a = n.atom;
            a.index = fn(a.index, bound);
            return Expr::atom(std::move(a));
          },
          [&](const AddNode& n) { return Expr::add(map_indices(n.lhs, fn, bound), map_indices(n.rhs, fn, bound)); },
          [&](const SubNode& n) { return Expr::sub(map_indices(n.lhs, fn, bound), map_indices(n.rhs, fn, bound)); },
          [&](const NegNode& n) { return Expr::neg(map_indices(n.arg, fn, bound)); },
          [&](const MulNode& n) { return Expr::mul(map_indices(n.lhs, fn, bound), map_indices(n.rhs, fn, bound)); },
          [&](const PowNode& n) { return Expr::pow(map_indices(n.base, fn, bound), n.exponent); },
          [&](const ScaleNode& n) { return Expr::scale(n.factor, map_indices(n.arg, fn, bound)); },
          [&](const SumNode& n) {
            LinearIndex upper = fn(n.upper, bound);
            bound.push_back(n.bound);
            Expr body = map_indices(n.body, fn, bound);
            bound.pop_back();
            return Expr::sum(n.bound, n.lower, std::move(upper), std::move(body));
          },
      },
      e.node().v);
}

inline void collect_free_vars(const Expr& e, std::vector<std::string>& out, std::vector<std::string>& bound) {
  auto note = [&](const LinearIndex& li) {
    for (const auto& [v, c] : li.coeffs()) {
      if (std::find(bound.begin(), bound.end(), v) != bound.end()) continue;
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  };
  std::visit(detail::overloaded{
                 [&](const AtomNode& n) { note(n.atom.index); },
                 [&](const AddNode& n) { collect_free_vars(n.lhs, out, bound); collect_free_vars(n.rhs, out, bound); },
                 [&](const SubNode& n) { collect_free_vars(n.lhs, out, bound); collect_free_vars(n.rhs, out, bound); },
                 [&](const NegNode& n) { collect_free_vars(n.arg, out, bound); },
                 [&](const MulNode& n) { collect_free_vars(n.lhs, out, bound); collect_free_vars(n.rhs, out, bound); },
                 [&](const PowNode& n) { collect_free_vars(n.base, out, bound); },
                 [&](const ScaleNode& n) { collect_free_vars(n.arg, out, bound); },
                 [&](const SumNode& n) {
                   note(n.upper);
                   bound.push_back(n.bound);
                   collect_free_vars(n.body, out, bound);
                   bound.pop_back();
                 },
             },
             e.node().v);
}

/// Free variables in order of first appearance.
inline std::vector<std::string> free_vars(const Expr& e) {
  std::vector<std::string> out, bound;
  collect_free_vars(e, out, bound);
  return out;
}

inline std::vector<std::string> free_vars(const Identity& id) {
  std::vector<std::string> out, bound;
  collect_free_vars(id.lhs, out, bound);
  collect_free_vars(id.rhs, out, bound);
  return out;
}

/// Number of atoms whose index mentions var (free occurrences only).
inline std::size_t atom_occurrences(const Expr& e, std::string_view var) {
  return std::visit(
      detail::overloaded{
          [&](const AtomNode& n) -> std::size_t { return n.atom.index.mentions(var) ? 1 : 0; },
          [&](const AddNode& n) { return atom_occurrences(n.lhs, var) + atom_occurrences(n.rhs, var); },
          [&](const SubNode& n) { return atom_occurrences(n.lhs, var) + atom_occurrences(n.rhs, var); },
          [&](const NegNode& n) { return atom_occurrences(n.arg, var); },
          [&](const MulNode& n) { return atom_occurrences(n.lhs, var) + atom_occurrences(n.rhs, var); },
          [&](const PowNode& n) { return atom_occurrences(n.base, var); },
          [&](const ScaleNode& n) { return atom_occurrences(n.arg, var); },
          [&](const SumNode& n) -> std::size_t {
            return (n.upper.mentions(var) ? 1 : 0) + (n.bound == var ? 0 : atom_occurrences(n.body, var));
          },
      },
      e.node().v);
}

// ---------------------------------------------------------------------------
// Printing
//
// Output is accepted by the parser and reparses to the same tree. Precedence
// levels: 0 sum/difference, 1 product, 2 power, 3 primary.

namespace detail {

inline bool starts_with_rat(const Expr& e) {
  const auto& v = e.node().v;
  if (const auto* a = std::get_if<AtomNode>(&v)) return a->atom.kind == AtomKind::Const && a->atom.value >= 0;
  if (const auto* s = std::get_if<ScaleNode>(&v)) return s->factor >= 0;
  if (const auto* m = std::get_if<MulNode>(&v)) return starts_with_rat(m->lhs);
  return false;
}

inline int precedence(const Expr& e) {
  return std::visit(overloaded{
                        [](const AtomNode& n) {
                          if (n.atom.kind != AtomKind::Const) return 3;
                          if (n.atom.value < 0) return 0;
                          return n.atom.value.get_den() == 1 ? 3 : 2;
                        },
                        [](const AddNode&) { return 0; },
                        [](const SubNode&) { return 0; },
                        [](const NegNode&) { return 0; },
                        [](const MulNode&) { return 1; },
                        [](const PowNode&) { return 2; },
                        [](const ScaleNode& n) { return n.factor < 0 ? 0 : 1; },
                        [](const SumNode&) { return 3; },
                    },
                    e.node().v);
}

std::string print_raw(const Expr& e);

inline std::string print_at(const Expr& e, int min_prec) {
  std::string s = print_raw(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

inline std::string print_atom(const Atom& a) {
  switch (a.kind) {
    case AtomKind::Fib: return "F[" + a.index.to_string() + "]";
    case AtomKind::Luc: return "L[" + a.index.to_string() + "]";
    case AtomKind::GenFib:
      return "G(" + a.seed0.get_str() + "," + a.seed1.get_str() + ")[" + a.index.to_string() + "]";
    case AtomKind::SignPow: return "(-1)^(" + a.index.to_string() + ")";
    case AtomKind::Const: return a.value.get_str();
  }
  return {};
}

inline std::string print_raw(const Expr& e) {
  return std::visit(
      overloaded{
          [](const AtomNode& n) { return print_atom(n.atom); },
          [](const AddNode& n) { return print_at(n.lhs, 0) + " + " + print_at(n.rhs, 1); },
          [](const SubNode& n) { return print_at(n.lhs, 0) + " - " + print_at(n.rhs, 1); },
          [](const NegNode& n) {
            return "-" + (starts_with_rat(n.arg) ? "(" + print_raw(n.arg) + ")" : print_at(n.arg, 1));
          },
          [](const MulNode& n) {
            const std::string left = starts_with_rat(n.lhs) ? "(" + print_raw(n.lhs) + ")" : print_at(n.lhs, 1);
            return left + "*" + print_at(n.rhs, 2);
          },
          [](const PowNode& n) { return print_at(n.base, 3) + "^" + std::to_string(n.exponent); },
          [](const ScaleNode& n) { return n.factor.get_str() + "*" + print_at(n.arg, 1); },
          [](const SumNode& n) {
            return "sum(" + n.bound + "=" + std::to_string(n.lower) + ".." + n.upper.to_string() + ", " +
                   print_raw(n.body) + ")";
          },
      },
      e.node().v);
}

}  // namespace detail

inline std::string to_string(const Expr& e) { return detail::print_raw(e); }
inline std::string to_string(const Identity& id) { return to_string(id.lhs) + " = " + to_string(id.rhs); }

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

// [x(k), x(k+1)] for the two-term recurrence x(k+2) = x(k+1) + x(k), run
// forwards from the seeds for k >= 0 and backwards (x(k) = x(k+2) - x(k+1))
// for k < 0. Steps are batched by squaring the one-step matrix.
inline std::pair<Scalar, Scalar> two_term_value(const Scalar& s0, const Scalar& s1, std::int64_t k) {
  using M2 = std::array<Integer, 4>;
  auto mul = [](const M2& a, const M2& b) {
    return M2{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
              a[2] * b[1] + a[3] * b[3]};
  };
  const M2 forward{0, 1, 1, 1};
  const M2 backward{-1, 1, 1, 0};
  M2 step = k >= 0 ? forward : backward;
  std::uint64_t e = k >= 0 ? static_cast<std::uint64_t>(k) : static_cast<std::uint64_t>(-(k + 1)) + 1;
  M2 acc{1, 0, 0, 1};
  while (e > 0) {
    if (e & 1U) acc = mul(acc, step);
    e >>= 1U;
    if (e > 0) step = mul(step, step);
  }
  return {Scalar(acc[0]) * s0 + Scalar(acc[1]) * s1, Scalar(acc[2]) * s0 + Scalar(acc[3]) * s1};
}

}  // namespace detail

/// Value of a single atom at an integer index.
inline Scalar atom_value(const Atom& a, std::int64_t k) {
  switch (a.kind) {
    case AtomKind::Fib: return detail::two_term_value(0, 1, k).first;
    case AtomKind::Luc: return detail::two_term_value(2, 1, k).first;
    case AtomKind::GenFib: return detail::two_term_value(a.seed0, a.seed1, k).first;
    case AtomKind::SignPow: return (k % 2 == 0) ? 1 : -1;
    case AtomKind::Const: return a.value;
  }
  return 0;
}

inline Scalar eval(const Expr& e, const Assignment& at);

namespace detail {

inline Scalar eval_in(const Expr& e, Assignment& at) {
  return std::visit(
      overloaded{
          [&](const AtomNode& n) -> Scalar {
            if (n.atom.kind == AtomKind::Const) return n.atom.value;
            return atom_value(n.atom, n.atom.index.evaluate(at));
          },
          [&](const AddNode& n) -> Scalar { return eval_in(n.lhs, at) + eval_in(n.rhs, at); },
          [&](const SubNode& n) -> Scalar { return eval_in(n.lhs, at) - eval_in(n.rhs, at); },
          [&](const NegNode& n) -> Scalar { return -eval_in(n.arg, at); },
          [&](const MulNode& n) -> Scalar {
            Scalar l = eval_in(n.lhs, at);
            if (l == 0) {
              eval_in(n.rhs, at);  // still reject unassigned variables
              return 0;
            }
            return l * eval_in(n.rhs, at);
          },
          [&](const PowNode& n) -> Scalar {
            const Scalar b = eval_in(n.base, at);
            Scalar r = 1;
            for (unsigned i = 0; i < n.exponent; ++i) r *= b;
            return r;
          },
          [&](const ScaleNode& n) -> Scalar { return n.factor * eval_in(n.arg, at); },
          [&](const SumNode& n) -> Scalar {
            const std::int64_t upper = n.upper.evaluate(at);
            std::int64_t from = n.lower, to = upper;
            bool negate = false;
            if (upper < n.lower - 1) {
              from = upper + 1;
              to = n.lower - 1;
              negate = true;
            }
            std::optional<std::int64_t> saved;
            if (auto it = at.find(n.bound); it != at.end()) saved = it->second;
            Scalar acc = 0;
            for (std::int64_t k = from; k <= to; ++k) {
              at[n.bound] = k;
              acc += eval_in(n.body, at);
            }
            if (saved) at[n.bound] = *saved;
            else at.erase(n.bound);
            return negate ? Scalar(-acc) : acc;
          },
      },
      e.node().v);
}

}  // namespace detail

/// Exact value of e; throws UsageError when a free variable is unassigned.
inline Scalar eval(const Expr& e, const Assignment& at) {
  Assignment scratch = at;
  return detail::eval_in(e, scratch);
}

// ---------------------------------------------------------------------------
// Substitution, shifting, change of variables

namespace detail {

inline Expr unroll_sum(const SumNode& n, std::int64_t upper);

inline Expr substitute_in(const Expr& e, std::string_view var, std::int64_t value) {
  return std::visit(
      overloaded{
          [&](const AtomNode& n) {
            if (!n.atom.index.mentions(var)) return e;
            Atom a = n.atom;
            a.index = a.index.substitute(var, value);
            return Expr::atom(std::move(a));
          },
          [&](const AddNode& n) { return Expr::add(substitute_in(n.lhs, var, value), substitute_in(n.rhs, var, value)); },
          [&](const SubNode& n) { return Expr::sub(substitute_in(n.lhs, var, value), substitute_in(n.rhs, var, value)); },
          [&](const NegNode& n) { return Expr::neg(substitute_in(n.arg, var, value)); },
          [&](const MulNode& n) { return Expr::mul(substitute_in(n.lhs, var, value), substitute_in(n.rhs, var, value)); },
          [&](const PowNode& n) { return Expr::pow(substitute_in(n.base, var, value), n.exponent); },
          [&](const ScaleNode& n) { return Expr::scale(n.factor, substitute_in(n.arg, var, value)); },
          [&](const SumNode& n) {
            if (n.bound == var) throw UsageError("cannot substitute the bound variable '" + n.bound + "' of a sum");
            SumNode s{n.bound, n.lower, n.upper.substitute(var, value), substitute_in(n.body, var, value)};
            if (s.upper.is_constant() && n.upper.mentions(var)) return unroll_sum(s, s.upper.offset());
            return Expr::sum(s.bound, s.lower, s.upper, s.body);
          },
      },
      e.node().v);
}

// Explicit Add chain for a sum with a fixed upper bound.
inline Expr unroll_sum(const SumNode& n, std::int64_t upper) {
  std::int64_t from = n.lower, to = upper;
  bool negate = false;
  if (upper < n.lower - 1) {
    from = upper + 1;
    to = n.lower - 1;
    negate = true;
  }
  if (from > to) return Expr::constant(0);
  Expr acc = substitute_in(n.body, n.bound, from);
  for (std::int64_t k = from + 1; k <= to; ++k) acc = Expr::add(acc, substitute_in(n.body, n.bound, k));
  return negate ? Expr::neg(acc) : acc;
}

}  // namespace detail

/// Eliminates var by fixing it to value. Sums whose upper limit becomes
/// constant are unrolled into explicit additions.
inline Expr substitute(const Expr& e, std::string_view var, std::int64_t value) {
  return detail::substitute_in(e, var, value);
}

inline Identity substitute(const Identity& id, std::string_view var, std::int64_t value) {
  Identity out{id.name, {}, substitute(id.lhs, var, value), substitute(id.rhs, var, value)};
  for (const auto& v : id.variables)
    if (v != var) out.variables.push_back(v);
  return out;
}

/// e with var replaced by var + delta.
inline Expr shift(const Expr& e, std::string_view var, std::int64_t delta) {
  std::vector<std::string> bound;
  return map_indices(
      e,
      [&](const LinearIndex& li, const std::vector<std::string>& b) {
        if (std::find(b.begin(), b.end(), var) != b.end()) return li;
        LinearIndex out = li;
        out.add_offset(li.coeff(var) * delta);
        return out;
      },
      bound);
}

using VariableMap = std::map<std::string, LinearIndex, std::less<>>;

/// Rewrites every index through an invertible integer-affine change of
/// variables. Each mapped variable v is replaced by mapping[v]; the new
/// variable list puts the fresh variables of mapping[v] in v's slot.
inline Identity change_vars(const Identity& id, const VariableMap& mapping) {
  for (const auto& [v, img] : mapping)
    if (std::find(id.variables.begin(), id.variables.end(), v) == id.variables.end())
      throw UsageError("change_vars: '" + v + "' is not a variable of the identity");

  std::vector<std::string> fresh;
  auto push = [&](const std::string& v) {
    if (std::find(fresh.begin(), fresh.end(), v) == fresh.end()) fresh.push_back(v);
  };
  for (const auto& v : id.variables) {
    auto it = mapping.find(v);
    if (it == mapping.end()) {
      push(v);
    } else {
      // Genuinely new variables take the slot first, then any re-used ones.
      for (const auto& [w, c] : it->second.coeffs())
        if (std::find(id.variables.begin(), id.variables.end(), w) == id.variables.end()) push(w);
      for (const auto& [w, c] : it->second.coeffs()) push(w);
    }
  }
  if (fresh.size() != id.variables.size())
    throw UsageError("change_vars: mapping changes the number of variables (" + std::to_string(id.variables.size()) +
                     " -> " + std::to_string(fresh.size()) + ")");
  Matrix t(id.variables.size(), fresh.size());
  for (std::size_t i = 0; i < id.variables.size(); ++i) {
    auto it = mapping.find(id.variables[i]);
    const LinearIndex img = it == mapping.end() ? LinearIndex::variable(id.variables[i]) : it->second;
    for (std::size_t j = 0; j < fresh.size(); ++j) t(i, j) = static_cast<long>(img.coeff(fresh[j]));
  }
  const Scalar det = determinant(t);
  if (det != 1 && det != -1)
    throw UsageError("change_vars: mapping is not unimodular (determinant " + det.get_str() + ")");

  auto rewrite = [&](const Expr& e) {
    std::vector<std::string> bound;
    return map_indices(
        e,
        [&](const LinearIndex& li, const std::vector<std::string>& b) {
          for (const auto& bv : b)
            if (mapping.contains(bv)) throw UsageError("change_vars: mapping rebinds sum variable '" + bv + "'");
          return li.remap(mapping);
        },
        bound);
  };
  return Identity{id.name, std::move(fresh), rewrite(id.lhs), rewrite(id.rhs)};
}

/// Flattens top-level +, -, unary minus and scaling into signed terms.
inline void additive_terms(const Expr& e, const Scalar& factor, std::vector<std::pair<Scalar, Expr>>& out) {
  const auto& v = e.node().v;
  if (const auto* a = std::get_if<AddNode>(&v)) {
    additive_terms(a->lhs, factor, out);
    additive_terms(a->rhs, factor, out);
  } else if (const auto* s = std::get_if<SubNode>(&v)) {
    additive_terms(s->lhs, factor, out);
    additive_terms(s->rhs, -factor, out);
  } else if (const auto* n = std::get_if<NegNode>(&v)) {
    additive_terms(n->arg, -factor, out);
  } else if (const auto* sc = std::get_if<ScaleNode>(&v)) {
    additive_terms(sc->arg, factor * sc->factor, out);
  } else {
    out.emplace_back(factor, e);
  }
}

}  // namespace fibid
