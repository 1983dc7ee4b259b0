#pragma once

// Trivalent graph of F-triples.
//
// Vectors are generated by x = 2(u + v) - w, the vector form of the F-function
// recurrence. Starting from the standard basis this produces the zigzag
// sequence e1, e2, ...; starting from any F-triple {u, v, w} the three
// neighbours x, y, z give new F-triples, which tiles an infinite trivalent
// graph. The scanner checks the numeric patterns visible in the sequence.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fibid/errors.hpp"
#include "fibid/linalg.hpp"

namespace fibid {

struct Vec3 {
  std::array<Integer, 3> x{0, 0, 0};

  Vec3() = default;
  Vec3(Integer a, Integer b, Integer c) : x{std::move(a), std::move(b), std::move(c)} {}

  const Integer& operator[](std::size_t i) const { return x[i]; }
  Integer& operator[](std::size_t i) { return x[i]; }

  Integer sum() const { return x[0] + x[1] + x[2]; }
  Integer norm2() const { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
  friend Vec3 operator*(const Integer& k, const Vec3& a) { return {k * a[0], k * a[1], k * a[2]}; }
  friend Integer dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
  friend bool operator==(const Vec3& a, const Vec3& b) { return a.x == b.x; }
  friend bool operator<(const Vec3& a, const Vec3& b) { return a.x < b.x; }

  std::string to_string() const {
    return "(" + x[0].get_str() + "," + x[1].get_str() + "," + x[2].get_str() + ")";
  }
};

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) { return os << v.to_string(); }

/// Ordered for generation; compared as a set via key().
struct Triple {
  Vec3 u, v, w;

  std::array<Vec3, 3> key() const {
    std::array<Vec3, 3> k{u, v, w};
    std::sort(k.begin(), k.end());
    return k;
  }
};

inline Vec3 canonical_e(int i) {
  Vec3 e;
  e[static_cast<std::size_t>(i - 1)] = 1;
  return e;
}

inline Triple canonical_seed() { return {canonical_e(1), canonical_e(2), canonical_e(3)}; }

/// 2(e3 + e2) - e1.
inline Vec3 f_generate(const Vec3& e3, const Vec3& e2, const Vec3& e1) { return Integer(2) * (e3 + e2) - e1; }

/// e1, e2, e3, then e_{n+1} = 2(e_n + e_{n-1}) - e_{n-2}.
inline std::vector<Vec3> f_sequence(const Vec3& e1, const Vec3& e2, const Vec3& e3, std::size_t count) {
  if (count < 3) throw UsageError("f_sequence: count must be at least 3");
  std::vector<Vec3> out{e1, e2, e3};
  while (out.size() < count) {
    const std::size_t n = out.size();
    out.push_back(f_generate(out[n - 1], out[n - 2], out[n - 3]));
  }
  return out;
}

/// Norm condition for one vector: coordinate sum N >= 0 with N^2 equal to the
/// squared length. With strict, N must also be a perfect square.
inline bool has_sum_norm(const Vec3& a, bool strict = false) {
  const Integer s = a.sum();
  if (s < 0 || s * s != a.norm2()) return false;
  return !strict || mpz_perfect_square_p(s.get_mpz_t()) != 0;
}

inline bool is_f_triple(const Triple& t, bool strict = false) {
  const auto& [u, v, w] = t;
  if (!has_sum_norm(u, strict) || !has_sum_norm(v, strict) || !has_sum_norm(w, strict)) return false;
  const Integer nu = u.sum(), nv = v.sum(), nw = w.sum();
  const Integer uv = dot(u, v), vw = dot(v, w), wu = dot(w, u);
  return 2 * uv - vw - wu == 2 * nu * nv - nv * nw - nw * nu &&
         2 * wu - vw - uv == 2 * nu * nw - nv * nw - nv * nu &&
         2 * vw - uv - wu == 2 * nv * nw - nv * nu - nw * nu;
}

struct Children {
  Vec3 x, y, z;
  // The three new triples {u,v,x}, {v,w,y}, {u,w,z} in generation order.
  std::array<Triple, 3> triples;
};

inline Children children(const Triple& t) {
  const auto& [u, v, w] = t;
  Vec3 x = f_generate(u, v, w);
  Vec3 y = f_generate(w, v, u);
  Vec3 z = f_generate(w, u, v);
  return {x, y, z, {Triple{u, v, x}, Triple{v, w, y}, Triple{u, w, z}}};
}

/// A parametrized solution of a^2 + b^2 + c^2 = (a + b + c)^2.
inline Vec3 pythagorean_param(const Integer& m, const Integer& n) { return {-m * n, m * (m + n), n * (m + n)}; }

// ---------------------------------------------------------------------------
// Graph expansion

inline constexpr std::size_t kMaxGraphDepth = 16;

struct TriGraphNode {
  Triple triple;
  std::size_t depth = 0;
  std::optional<std::size_t> parent;  // index of the node this one was generated from
};

/// Breadth-first expansion; visit(node, index) is called once per distinct
/// triple in discovery order. Only the frontier and the seen-set are held.
template <class Visit>
void expand_graph_stream(const Triple& seed, std::size_t depth, Visit&& visit, bool strict = false) {
  if (depth > kMaxGraphDepth)
    throw UsageError("graph depth " + std::to_string(depth) + " exceeds the cap of " + std::to_string(kMaxGraphDepth));
  if (!is_f_triple(seed, strict)) throw DomainError("seed is not an F-triple");
  std::set<std::array<Vec3, 3>> seen{seed.key()};
  std::deque<std::pair<TriGraphNode, std::size_t>> frontier;
  std::size_t next_index = 0;
  TriGraphNode root{seed, 0, std::nullopt};
  visit(root, next_index);
  frontier.emplace_back(std::move(root), next_index++);
  while (!frontier.empty()) {
    auto [node, index] = std::move(frontier.front());
    frontier.pop_front();
    if (node.depth == depth) continue;
    for (auto& child : children(node.triple).triples) {
      if (!seen.insert(child.key()).second) continue;
      TriGraphNode n{std::move(child), node.depth + 1, index};
      visit(n, next_index);
      frontier.emplace_back(std::move(n), next_index++);
    }
  }
}

inline std::vector<TriGraphNode> expand_graph(const Triple& seed, std::size_t depth, bool strict = false) {
  std::vector<TriGraphNode> out;
  expand_graph_stream(seed, depth, [&](const TriGraphNode& n, std::size_t) { out.push_back(n); }, strict);
  return out;
}

// ---------------------------------------------------------------------------
// Observation scanner

inline constexpr std::size_t kDefaultFibTable = 90;

class FibTable {
 public:
  explicit FibTable(std::size_t size = kDefaultFibTable) {
    f_.reserve(size + 1);
    f_.emplace_back(0);
    if (size >= 1) f_.emplace_back(1);
    while (f_.size() <= size) f_.push_back(f_[f_.size() - 1] + f_[f_.size() - 2]);
  }

  std::size_t size() const { return f_.size() - 1; }
  const Integer& operator[](std::size_t k) const { return f_[k]; }

  std::optional<std::size_t> index_of(const Integer& x) const {
    auto it = std::lower_bound(f_.begin() + 1, f_.end(), x);
    if (it == f_.end() || *it != x) return x == 0 ? std::optional<std::size_t>(0) : std::nullopt;
    return static_cast<std::size_t>(it - f_.begin());
  }
  bool contains(const Integer& x) const { return index_of(x).has_value(); }

  /// (i, j) with F_i * F_j = |x|, i <= j, found by a two-pointer sweep.
  std::optional<std::pair<std::size_t, std::size_t>> product_of_two(const Integer& x) const {
    const Integer a = abs(x);
    if (a == 0) return std::make_pair(std::size_t{0}, std::size_t{0});
    std::size_t i = 1, j = f_.size() - 1;
    while (i <= j) {
      const Integer p = f_[i] * f_[j];
      if (p == a) return std::make_pair(i, j);
      if (p < a) ++i;
      else --j;
    }
    return std::nullopt;
  }

 private:
  std::vector<Integer> f_;
};

struct Finding {
  std::string key;          // "a", "b", "c", "i" ... "v"
  std::string description;
  bool holds = true;
  std::vector<std::string> notes;
};

struct FourthPowerInstance {
  std::size_t first = 0, second = 0;  // 1-based sequence positions
  Integer a, big_a, base;             // a * A = base^4 - 1
};

struct PrefixConvention {
  std::size_t start = 0;  // 1-based position of the first vector summed
  std::string lengths;    // "odd", "even" or "all"
  std::size_t checked = 0;
};

struct ObservationReport {
  std::vector<Finding> findings;
  std::vector<PrefixConvention> first_entry_conventions;  // every convention that matches
  std::vector<FourthPowerInstance> fourth_powers;
  std::optional<std::size_t> closed_form_break;  // first 1-based position deviating

  const Finding& at(std::string_view key) const {
    for (const auto& f : findings)
      if (f.key == key) return f;
    throw UsageError("no finding '" + std::string(key) + "'");
  }
  bool all_hold() const {
    return std::all_of(findings.begin(), findings.end(), [](const Finding& f) { return f.holds; });
  }
};

namespace detail {

inline std::optional<Integer> int_root4(const Integer& x) {
  if (x < 0) return std::nullopt;
  Integer r;
  mpz_root(r.get_mpz_t(), x.get_mpz_t(), 4);
  if (r * r * r * r != x) return std::nullopt;
  return r;
}

// F_k for any integer k (negative k by the reflection F_{-m} = (-1)^{m+1} F_m).
inline Integer fib_signed(const FibTable& fib, std::int64_t k) {
  if (k >= 0) return fib[static_cast<std::size_t>(k)];
  const Integer v = fib[static_cast<std::size_t>(-k)];
  return (-k) % 2 == 1 ? v : Integer(-v);
}

}  // namespace detail

/// Vector at 1-based position j of the canonical sequence predicted by the
/// closed form (-F_k F_{k+1}, F_k F_{k+2}, F_{k+1} F_{k+2}), k = j - 3.
inline Vec3 closed_form_term(const FibTable& fib, std::size_t j) {
  const auto k = static_cast<std::int64_t>(j) - 3;
  const Integer a = detail::fib_signed(fib, k), b = detail::fib_signed(fib, k + 1), c = detail::fib_signed(fib, k + 2);
  return {-a * b, a * c, b * c};
}

inline ObservationReport scan_observations(const std::vector<Vec3>& seq, std::size_t fib_table_size = kDefaultFibTable) {
  const FibTable fib(fib_table_size);
  ObservationReport rep;
  auto pos = [](std::size_t i) { return "e" + std::to_string(i + 1); };

  Finding a{"a", "every entry is a product of two Fibonacci numbers"};
  for (std::size_t i = 0; i < seq.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c)
      if (!fib.product_of_two(seq[i][c])) {
        a.holds = false;
        a.notes.push_back(pos(i) + " entry " + seq[i][c].get_str() + " is not F_i*F_j within the table");
      }
  rep.findings.push_back(std::move(a));

  Finding b{"b", "norm equals the coordinate sum"};
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (!has_sum_norm(seq[i])) {
      b.holds = false;
      b.notes.push_back(pos(i) + " = " + seq[i].to_string());
    }
  rep.findings.push_back(std::move(b));

  Finding c{"c", "e_n - e_{n-2} has Fibonacci entries in absolute value"};
  for (std::size_t i = 2; i < seq.size(); ++i) {
    const Vec3 d = seq[i] - seq[i - 2];
    for (std::size_t k = 0; k < 3; ++k)
      if (!fib.contains(abs(d[k]))) {
        c.holds = false;
        c.notes.push_back(pos(i) + " - " + pos(i - 2) + " = " + d.to_string());
        break;
      }
  }
  rep.findings.push_back(std::move(c));

  // (i) Prefix sums of first entries; every start/length convention that
  // checks at least two prefixes and matches is reported.
  Finding f1{"i", "prefix sums of first entries are negated Fibonacci squares"};
  for (std::size_t start = 1; start <= std::min<std::size_t>(4, seq.size()); ++start) {
    for (const std::string lengths : {"odd", "even", "all"}) {
      Integer acc = 0;
      std::size_t checked = 0;
      bool ok = true;
      for (std::size_t i = start - 1, len = 1; i < seq.size(); ++i, ++len) {
        acc += seq[i][0];
        if ((lengths == "odd" && len % 2 == 0) || (lengths == "even" && len % 2 == 1)) continue;
        ++checked;
        Integer r;
        const Integer neg = -acc;
        if (neg < 0 || mpz_perfect_square_p(neg.get_mpz_t()) == 0) {
          ok = false;
          break;
        }
        mpz_sqrt(r.get_mpz_t(), neg.get_mpz_t());
        if (!fib.contains(r)) {
          ok = false;
          break;
        }
      }
      if (ok && checked >= 2) rep.first_entry_conventions.push_back({start, lengths, checked});
    }
  }
  f1.holds = !rep.first_entry_conventions.empty();
  for (const auto& pc : rep.first_entry_conventions)
    f1.notes.push_back("from e" + std::to_string(pc.start) + ", " + pc.lengths + " lengths (" +
                       std::to_string(pc.checked) + " prefixes)");
  rep.findings.push_back(std::move(f1));

  Finding f2{"ii", "prefix sums of second entries from e4 are products of two Fibonacci numbers"};
  {
    Integer acc = 0;
    for (std::size_t i = 3; i < seq.size(); ++i) {
      acc += seq[i][1];
      if (!fib.product_of_two(acc)) {
        f2.holds = false;
        f2.notes.push_back("prefix up to " + pos(i) + " = " + acc.get_str());
      }
    }
  }
  rep.findings.push_back(std::move(f2));

  Finding f3{"iii", "for (-a,b,c): c - b - a = +-1"};
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const Integer t = seq[i][2] - seq[i][1] + seq[i][0];
    if (t != 1 && t != -1) {
      f3.holds = false;
      f3.notes.push_back(pos(i) + " gives " + t.get_str());
    }
  }
  rep.findings.push_back(std::move(f3));

  Finding f4{"iv", "for (-a,b,c), (-A,B,C) two apart: C - c = (B - b) + (A - a)"};
  for (std::size_t i = 0; i + 2 < seq.size(); ++i) {
    const Vec3& p = seq[i];
    const Vec3& q = seq[i + 2];
    const Integer lhs = q[2] - p[2];
    const Integer rhs = (q[1] - p[1]) + (-q[0] - -p[0]);
    if (lhs != rhs) {
      f4.holds = false;
      f4.notes.push_back(pos(i) + ", " + pos(i + 2) + ((i + 1) % 2 == 0 ? " (top half)" : " (bottom half)"));
    }
  }
  rep.findings.push_back(std::move(f4));

  // (v) Pairs two apart from e4 on: (-a,b,c) and (-C,B,A); a*A + 1 is a
  // fourth power of a Fibonacci number.
  Finding f5{"v", "for (-a,b,c), (-C,B,A) two apart: a*A = F^4 - 1"};
  for (std::size_t i = 3; i + 2 < seq.size(); ++i) {
    const Integer small_a = -seq[i][0];
    const Integer big_a = seq[i + 2][2];
    const Integer p = small_a * big_a + 1;
    const auto root = detail::int_root4(p);
    if (!root || !fib.contains(*root)) {
      f5.holds = false;
      f5.notes.push_back(pos(i) + ", " + pos(i + 2) + ": " + small_a.get_str() + "*" + big_a.get_str() + " + 1 = " +
                         p.get_str());
      continue;
    }
    rep.fourth_powers.push_back({i + 1, i + 3, small_a, big_a, *root});
    f5.notes.push_back(small_a.get_str() + "*" + big_a.get_str() + " = " + root->get_str() + "^4 - 1");
  }
  rep.findings.push_back(std::move(f5));

  for (std::size_t i = 0; i < seq.size(); ++i)
    if (i + 2 > fib.size() || seq[i] != closed_form_term(fib, i + 1)) {
      rep.closed_form_break = i + 1;
      break;
    }
  return rep;
}

}  // namespace fibid
