#pragma once

// Minimal linear recurrence discovery from exact terms.
//
// For each candidate order k the recurrence coefficients solve the linear
// system  sum_i a_i t(j+i) = t(j+k)  over every window of the data; the first
// k whose system is consistent is the answer. Consistency over all windows is
// the held-out check: the first k equations determine a candidate and the
// remaining ones (at least `guard` of them) must agree.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fibid/closure.hpp"
#include "fibid/errors.hpp"
#include "fibid/expr.hpp"
#include "fibid/linalg.hpp"

namespace fibid {

inline constexpr std::size_t kDefaultMaxOrder = 16;
inline constexpr std::size_t kDefaultGuard = 6;

struct TermWindow {
  std::vector<Scalar> terms;
  std::int64_t origin = 0;  // index of terms[0]
};

/// True iff every residual of r over the window vanishes exactly.
inline bool is_annihilated(const TermWindow& w, const Recurrence& r) {
  if (w.terms.size() < r.order() + 1) return false;
  for (std::size_t j = 0; j + r.order() < w.terms.size(); ++j)
    if (r.residual(w.terms, j) != 0) return false;
  return true;
}

/// Smallest-order recurrence reproducing the whole window, or nullopt when no
/// order <= max_order does. The all-zero window yields x(n+1) = 0.
inline std::optional<Recurrence> find_min_recurrence(const TermWindow& w, std::size_t max_order = kDefaultMaxOrder,
                                                     std::size_t guard = kDefaultGuard) {
  if (max_order == 0) throw UsageError("find_min_recurrence: max order must be >= 1");
  if (w.terms.size() < 2 * max_order + guard)
    throw UsageError("find_min_recurrence: need at least " + std::to_string(2 * max_order + guard) +
                     " terms for max order " + std::to_string(max_order) + " and guard " + std::to_string(guard) +
                     ", got " + std::to_string(w.terms.size()));
  for (std::size_t k = 1; k <= max_order; ++k) {
    const std::size_t equations = w.terms.size() - k;
    Matrix a(equations, k);
    std::vector<Scalar> b(equations);
    for (std::size_t j = 0; j < equations; ++j) {
      for (std::size_t i = 0; i < k; ++i) a(j, i) = w.terms[j + i];
      b[j] = w.terms[j + k];
    }
    if (auto sol = solve_linear(a, b)) {
      Recurrence r(std::move(*sol));
      if (is_annihilated(w, r)) return r;
    }
  }
  return std::nullopt;
}

/// Terms e(var = from), ..., e(var = from + count - 1) with the other
/// variables fixed by `others`.
inline TermWindow tabulate(const Expr& e, std::string_view var, const Assignment& others, std::int64_t from,
                           std::size_t count) {
  TermWindow w{{}, from};
  w.terms.reserve(count);
  Assignment at = others;
  for (std::size_t i = 0; i < count; ++i) {
    at.insert_or_assign(std::string(var), from + static_cast<std::int64_t>(i));
    w.terms.push_back(eval(e, at));
  }
  return w;
}

}  // namespace fibid
