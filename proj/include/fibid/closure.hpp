#pragma once

// Recurrence algebra for C-finite sequences.
//
// A Recurrence of order k with coefficients (a0, ..., a_{k-1}) means
//   x(n+k) = a_{k-1} x(n+k-1) + ... + a1 x(n+1) + a0 x(n),
// i.e. characteristic polynomial x^k - sum a_i x^i. Closure operations act on
// characteristic polynomials: lcm for sums, the Kronecker product of companion
// matrices for point-wise products, multiplication by (x - 1) for prefix sums.
// Coefficients derived for an expression never depend on the values of the
// other variables, so one recurrence serves every assignment of them.

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fibid/errors.hpp"
#include "fibid/expr.hpp"
#include "fibid/linalg.hpp"

namespace fibid {

class Recurrence {
 public:
  explicit Recurrence(std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw UsageError("a recurrence needs order >= 1");
  }

  /// From a characteristic polynomial of degree >= 1 (normalized to monic).
  static Recurrence from_char_poly(const Poly& p) {
    if (p.degree() < 1) throw UsageError("characteristic polynomial must have degree >= 1, got " + p.to_string());
    const Poly m = p.monic();
    std::vector<Scalar> c(static_cast<std::size_t>(m.degree()));
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = -m.coeff(i);
    return Recurrence(std::move(c));
  }

  /// x(n+1) = x(n).
  static Recurrence constant() { return Recurrence({Scalar(1)}); }

  std::size_t order() const { return coeffs_.size(); }
  const std::vector<Scalar>& coeffs() const { return coeffs_; }
  bool backward_extensible() const { return coeffs_.front() != 0; }

  Poly char_poly() const {
    std::vector<Scalar> c(order() + 1);
    for (std::size_t i = 0; i < order(); ++i) c[i] = -coeffs_[i];
    c[order()] = 1;
    return Poly(std::move(c));
  }

  /// Maps (x(n), ..., x(n+k-1)) to (x(n+1), ..., x(n+k)).
  Matrix companion() const {
    const std::size_t k = order();
    Matrix m(k, k);
    for (std::size_t i = 0; i + 1 < k; ++i) m(i, i + 1) = 1;
    for (std::size_t j = 0; j < k; ++j) m(k - 1, j) = coeffs_[j];
    return m;
  }

  /// x(at+k) - sum a_i x(at+i) over a window of consecutive terms.
  Scalar residual(std::span<const Scalar> terms, std::size_t at) const {
    if (at + order() >= terms.size()) throw UsageError("residual window runs past the available terms");
    Scalar r = terms[at + order()];
    for (std::size_t i = 0; i < order(); ++i) r -= coeffs_[i] * terms[at + i];
    return r;
  }

  /// Descending-shift form: "x(n+2) = x(n+1) + x(n)".
  std::string to_string(std::string_view var = "n") const {
    auto shift_name = [&](std::size_t s) {
      return "x(" + std::string(var) + (s == 0 ? "" : "+" + std::to_string(s)) + ")";
    };
    std::ostringstream out;
    out << shift_name(order()) << " =";
    bool first = true;
    for (std::size_t i = order(); i-- > 0;) {
      const Scalar& c = coeffs_[i];
      if (c == 0) continue;
      const Scalar mag = abs(c);
      if (first) out << (c < 0 ? " -" : " ");
      else out << (c < 0 ? " - " : " + ");
      first = false;
      if (mag != 1) out << mag.get_str() << "*";
      out << shift_name(i);
    }
    if (first) out << " 0";
    return out.str();
  }

  /// Coefficients in descending-shift order (a_{k-1}, ..., a0).
  std::vector<Scalar> descending() const { return {coeffs_.rbegin(), coeffs_.rend()}; }

  friend bool operator==(const Recurrence&, const Recurrence&) = default;

 private:
  std::vector<Scalar> coeffs_;
};

/// Recurrence plus the k initial terms at indices 0..k-1.
struct CFiniteSeq {
  Recurrence recurrence;
  std::vector<Scalar> initials;
};

/// Exact n-th term. Negative n steps backwards and needs a0 != 0.
inline Scalar seq_term(const CFiniteSeq& s, std::int64_t n) {
  const std::size_t k = s.recurrence.order();
  const auto& a = s.recurrence.coeffs();
  if (s.initials.size() != k) throw UsageError("CFiniteSeq needs exactly order-many initial terms");
  if (n >= 0 && static_cast<std::size_t>(n) < k) return s.initials[static_cast<std::size_t>(n)];
  std::vector<Scalar> win = s.initials;  // window at indices base..base+k-1
  if (n >= 0) {
    for (std::int64_t base = 0; base + static_cast<std::int64_t>(k) <= n; ++base) {
      Scalar next = 0;
      for (std::size_t i = 0; i < k; ++i) next += a[i] * win[i];
      win.erase(win.begin());
      win.push_back(std::move(next));
    }
    return win.back();
  }
  if (!s.recurrence.backward_extensible())
    throw DomainError("seq_term: backward extension needs a nonzero constant coefficient a0");
  for (std::int64_t base = 0; base > n; --base) {
    Scalar prev = win.back();
    for (std::size_t i = 1; i < k; ++i) prev -= a[i] * win[i - 1];
    prev /= a[0];
    win.pop_back();
    win.insert(win.begin(), std::move(prev));
  }
  return win.front();
}

/// Recurrence whose characteristic polynomial is the lcm of the inputs';
/// annihilates every sum of sequences annihilated by r1 and r2.
inline Recurrence rec_add(const Recurrence& r1, const Recurrence& r2) {
  if (r1 == r2) return r1;
  return Recurrence::from_char_poly(lcm(r1.char_poly(), r2.char_poly()));
}

/// Characteristic polynomial of the Kronecker product of the companion
/// matrices; annihilates every point-wise product.
inline Recurrence rec_mul(const Recurrence& r1, const Recurrence& r2) {
  const std::size_t dim = r1.order() * r2.order();
  if (dim > kCharPolyDimensionCap)
    throw UnsupportedError("product recurrence of order " + std::to_string(dim) + " exceeds the cap of " +
                           std::to_string(kCharPolyDimensionCap));
  return Recurrence::from_char_poly(char_poly(kronecker(r1.companion(), r2.companion())));
}

/// Multiplies the characteristic polynomial by (x - 1).
inline Recurrence rec_partial_sum(const Recurrence& r) {
  return Recurrence::from_char_poly(r.char_poly() * Poly{-1, 1});
}

/// Companion matrix of the two-term Fibonacci recurrence.
inline Matrix fibonacci_companion() { return Matrix{{0, 1}, {1, 1}}; }

/// Annihilator of an atom as a function of var. Two-term atoms whose index
/// has coefficient alpha in var get the characteristic polynomial of M^alpha
/// (order 2, coefficients depend only on alpha).
inline Recurrence atom_recurrence(const Atom& a, std::string_view var) {
  const std::int64_t alpha = a.kind == AtomKind::Const ? 0 : a.index.coeff(var);
  if (alpha == 0) return Recurrence::constant();
  if (a.kind == AtomKind::SignPow) return Recurrence({Scalar(alpha % 2 == 0 ? 1 : -1)});
  const Matrix m = fibonacci_companion();
  const std::uint64_t mag = alpha < 0 ? static_cast<std::uint64_t>(-alpha) : static_cast<std::uint64_t>(alpha);
  const Matrix step = alpha < 0 ? *inverse(m) : m;
  return Recurrence::from_char_poly(char_poly(step.pow(mag)));
}

namespace detail {

inline bool mentions_free(const Expr& e, std::string_view var) { return atom_occurrences(e, var) > 0; }

}  // namespace detail

/// Structural annihilator of e as a sequence in var, valid for every integer
/// assignment of the remaining variables.
inline Recurrence recurrence_of(const Expr& e, std::string_view var) {
  return std::visit(
      detail::overloaded{
          [&](const AtomNode& n) { return atom_recurrence(n.atom, var); },
          [&](const AddNode& n) { return rec_add(recurrence_of(n.lhs, var), recurrence_of(n.rhs, var)); },
          [&](const SubNode& n) { return rec_add(recurrence_of(n.lhs, var), recurrence_of(n.rhs, var)); },
          [&](const NegNode& n) { return recurrence_of(n.arg, var); },
          [&](const ScaleNode& n) { return recurrence_of(n.arg, var); },
          [&](const MulNode& n) {
            const Recurrence l = recurrence_of(n.lhs, var);
            const Recurrence r = recurrence_of(n.rhs, var);
            if (l == Recurrence::constant()) return r;
            if (r == Recurrence::constant()) return l;
            return rec_mul(l, r);
          },
          [&](const PowNode& n) {
            if (n.exponent == 0) return Recurrence::constant();
            const Recurrence base = recurrence_of(n.base, var);
            Recurrence acc = base;
            for (unsigned i = 1; i < n.exponent; ++i) acc = rec_mul(acc, base);
            return acc;
          },
          [&](const SumNode& n) {
            if (n.bound == var) return Recurrence::constant();
            if (!n.upper.mentions(var)) return recurrence_of(n.body, var);
            if (detail::mentions_free(n.body, var))
              throw UnsupportedError("sum over " + n.bound + " up to " + n.upper.to_string() +
                                     " has a body that mentions the limit variable " + std::string(var));
            return rec_partial_sum(recurrence_of(n.body, n.bound));
          },
      },
      e.node().v);
}

}  // namespace fibid
