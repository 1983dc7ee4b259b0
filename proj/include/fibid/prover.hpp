#pragma once

// Identity prover.
//
// To prove lhs = rhs, take d = lhs - rhs and a variable v. recurrence_of(d, v)
// gives an order-k recurrence that annihilates d for every value of the other
// variables, so d vanishes identically once d(v=0), ..., d(v=k-1) vanish.
// Each of those base cases is either a number (no variables left) or a smaller
// identity in the remaining variables, proved the same way. The resulting tree
// is a Certificate; check_certificate re-validates one without re-deriving the
// recurrences.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "fibid/closure.hpp"
#include "fibid/discovery.hpp"
#include "fibid/errors.hpp"
#include "fibid/expr.hpp"
#include "fibid/linalg.hpp"

namespace fibid {

enum class Coverage { Nonnegative, AllIntegers };

inline std::string to_string(Coverage c) { return c == Coverage::AllIntegers ? "all-integers" : "nonnegative"; }

struct Certificate;

struct BaseCase {
  std::int64_t j = 0;
  Scalar value = 0;                            // numeric case: d at v = j
  std::shared_ptr<const Certificate> nested;   // set when variables remain
  bool numeric() const { return !nested; }
};

/// Evidence that a recurrence smaller than the composed one annihilates both
/// sides: certificates for "q applied to lhs = 0" and "q applied to rhs = 0".
struct Minimization {
  Recurrence composed;
  std::vector<std::shared_ptr<const Certificate>> residuals;
};

struct Certificate {
  Identity identity;
  std::string variable;  // empty for a variable-free identity
  Recurrence recurrence = Recurrence::constant();
  Coverage coverage = Coverage::AllIntegers;
  std::vector<BaseCase> base_cases;
  std::size_t witness_terms = 0;
  std::optional<Minimization> minimization;
};

struct Counterexample {
  Assignment assignment;
  Scalar lhs_value;
  Scalar rhs_value;
};

struct Proved { Certificate certificate; };
struct Refuted { Counterexample counterexample; };
struct Unsupported { std::string reason; };

using Verdict = std::variant<Proved, Refuted, Unsupported>;

struct ProveOptions {
  bool minimize = false;
  std::size_t witness_terms = 8;
  std::int64_t refutation_radius = 50;
};

inline constexpr std::size_t kCheckGuard = 6;

namespace detail {

// Deterministic sample values for "the other variables".
inline std::int64_t sample_value(std::size_t sample, std::size_t var_index) {
  static constexpr std::int64_t table[] = {3, -2, 5, -4, 7, 2, -3, 4, -5, 6};
  return table[(sample * 3 + var_index * 7) % std::size(table)];
}

inline Assignment sample_assignment(const std::vector<std::string>& vars, std::size_t sample) {
  Assignment a;
  for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = sample_value(sample, i);
  return a;
}

// Free variables of id, declared ones first in declared order.
inline std::vector<std::string> ordered_vars(const Identity& id) {
  const auto present = free_vars(id);
  std::vector<std::string> out;
  for (const auto& v : id.variables)
    if (std::find(present.begin(), present.end(), v) != present.end()) out.push_back(v);
  for (const auto& v : present)
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

inline std::vector<Assignment> witness_points(const std::vector<std::string>& vars, std::size_t count,
                                              Coverage coverage, std::string_view salt) {
  std::seed_seq seq(salt.begin(), salt.end());
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::int64_t> dist(coverage == Coverage::AllIntegers ? -12 : 0,
                                                   coverage == Coverage::AllIntegers ? 12 : 20);
  std::vector<Assignment> pts(count);
  for (auto& p : pts)
    for (const auto& v : vars) p[v] = dist(rng);
  return pts;
}

/// side(v + k) - sum a_i side(v + i) for the recurrence q.
inline Expr residual_expr(const Expr& side, std::string_view var, const Recurrence& q) {
  Expr acc = shift(side, var, static_cast<std::int64_t>(q.order()));
  for (std::size_t i = 0; i < q.order(); ++i) {
    const Scalar& a = q.coeffs()[i];
    if (a == 0) continue;
    Expr shifted = shift(side, var, static_cast<std::int64_t>(i));
    acc = Expr::sub(acc, a == 1 ? shifted : Expr::scale(a, shifted));
  }
  return acc;
}

inline Identity residual_identity(const Identity& id, const Expr& side, std::string_view var, const Recurrence& q) {
  std::vector<std::string> vars{std::string(var)};
  for (const auto& v : ordered_vars(id))
    if (v != var) vars.push_back(v);
  return Identity{id.name, std::move(vars), residual_expr(side, var, q), Expr::constant(0)};
}

struct Failure {
  Assignment at;
};

using LevelResult = std::variant<Certificate, Failure>;

inline LevelResult prove_level(const Identity& id, const ProveOptions& opts, bool allow_minimize);

inline std::optional<std::pair<Recurrence, Minimization>> try_minimize(const Identity& id, const std::string& var,
                                                                       const Recurrence& composed,
                                                                       const ProveOptions& opts) {
  std::vector<std::pair<Scalar, Expr>> terms;
  additive_terms(id.lhs, 1, terms);
  additive_terms(id.rhs, 1, terms);
  std::vector<std::string> others;
  for (const auto& v : ordered_vars(id))
    if (v != var) others.push_back(v);

  std::optional<Recurrence> q;
  for (const auto& [coef, t] : terms) {
    const Recurrence rt = recurrence_of(t, var);
    Recurrence qt = rt;
    if (rt.order() > 1) {
      std::optional<Recurrence> cand;
      bool informative = true;
      for (std::size_t s = 0; s < 2 && informative; ++s) {
        const TermWindow w = tabulate(t, var, sample_assignment(others, s), 0, 2 * rt.order() + kDefaultGuard);
        const auto r = find_min_recurrence(w, rt.order(), kDefaultGuard);
        const bool zero = std::all_of(w.terms.begin(), w.terms.end(), [](const Scalar& x) { return x == 0; });
        if (!r || zero) {
          informative = false;
          break;
        }
        cand = cand ? rec_add(*cand, *r) : *r;
      }
      if (informative && cand && cand->order() < rt.order()) qt = *cand;
    }
    q = q ? rec_add(*q, qt) : qt;
  }
  if (!q || q->order() >= composed.order()) return std::nullopt;

  Minimization evidence{composed, {}};
  for (const Expr* side : {&id.lhs, &id.rhs}) {
    auto res = prove_level(residual_identity(id, *side, var, *q), opts, false);
    auto* cert = std::get_if<Certificate>(&res);
    if (!cert) return std::nullopt;
    evidence.residuals.push_back(std::make_shared<const Certificate>(std::move(*cert)));
  }
  return std::make_pair(*q, std::move(evidence));
}

inline LevelResult prove_level(const Identity& id, const ProveOptions& opts, bool allow_minimize) {
  const Expr d = id.difference();
  const auto vars = ordered_vars(id);

  if (vars.empty()) {
    const Scalar value = eval(d, {});
    if (value != 0) return Failure{{}};
    Certificate c{id, "", Recurrence::constant(), Coverage::AllIntegers, {BaseCase{0, value, nullptr}}, 0, {}};
    return c;
  }

  // Declared order first; if that variable has no supported recurrence, fall
  // back to the variable occurring in the most atoms.
  std::vector<std::string> candidates = vars;
  std::stable_sort(candidates.begin() + 1, candidates.end(), [&](const auto& a, const auto& b) {
    return atom_occurrences(d, a) > atom_occurrences(d, b);
  });
  std::optional<Recurrence> composed;
  std::string var;
  std::optional<UnsupportedError> first_error;
  for (const auto& cand : candidates) {
    try {
      composed = recurrence_of(d, cand);
      var = cand;
      break;
    } catch (const UnsupportedError& e) {
      if (!first_error) first_error = e;
    }
  }
  if (!composed) throw *first_error;

  Recurrence rec = *composed;
  std::optional<Minimization> minimization;
  if (allow_minimize && opts.minimize) {
    if (auto m = try_minimize(id, var, *composed, opts)) {
      rec = m->first;
      minimization = std::move(m->second);
    }
  }

  Certificate cert{id, var, rec, Coverage::AllIntegers, {}, opts.witness_terms, std::move(minimization)};
  bool all_integers = rec.backward_extensible();
  if (cert.minimization)
    for (const auto& r : cert.minimization->residuals) all_integers = all_integers && r->coverage == Coverage::AllIntegers;

  for (std::size_t j = 0; j < rec.order(); ++j) {
    const auto jj = static_cast<std::int64_t>(j);
    Identity sub = substitute(id, var, jj);
    if (free_vars(sub).empty()) {
      const Scalar value = eval(sub.difference(), {});
      if (value != 0) return Failure{{{var, jj}}};
      cert.base_cases.push_back(BaseCase{jj, value, nullptr});
      continue;
    }
    auto res = prove_level(sub, opts, allow_minimize);
    if (auto* f = std::get_if<Failure>(&res)) {
      f->at[var] = jj;
      return *f;
    }
    auto nested = std::make_shared<const Certificate>(std::move(std::get<Certificate>(res)));
    all_integers = all_integers && nested->coverage == Coverage::AllIntegers;
    cert.base_cases.push_back(BaseCase{jj, 0, std::move(nested)});
  }
  cert.coverage = all_integers ? Coverage::AllIntegers : Coverage::Nonnegative;

  for (const auto& p : witness_points(vars, opts.witness_terms, cert.coverage, to_string(id)))
    if (eval(d, p) != 0) return Failure{p};
  return cert;
}

// Values 0, 1, -1, 2, -2, ... for the shell enumeration.
inline std::int64_t zigzag(std::int64_t i) { return (i % 2 == 1) ? (i + 1) / 2 : -(i / 2); }

// Calls fn on every assignment of max-norm exactly r; stops when fn returns true.
template <class Fn>
bool for_each_on_shell(const std::vector<std::string>& vars, std::int64_t r, Fn&& fn) {
  const std::int64_t width = 2 * r + 1;
  std::vector<std::int64_t> idx(vars.size(), 0);
  while (true) {
    Assignment a;
    bool on_shell = r == 0;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      const std::int64_t v = zigzag(idx[i]);
      a[vars[i]] = v;
      if (v == r || v == -r) on_shell = true;
    }
    if (on_shell && fn(a)) return true;
    std::size_t i = 0;
    while (i < vars.size() && ++idx[i] == width) idx[i++] = 0;
    if (i == vars.size()) return false;
  }
}

inline Counterexample make_counterexample(const Identity& id, Assignment at) {
  return Counterexample{at, eval(id.lhs, at), eval(id.rhs, at)};
}

// Smallest-norm failing assignment, scanning shells outward from the origin up
// to the norm of the known failure (bounded by the configured radius).
inline Counterexample find_counterexample(const Identity& id, Assignment failing, std::int64_t radius_cap) {
  const auto vars = ordered_vars(id);
  for (const auto& v : vars) failing.try_emplace(v, 0);
  std::int64_t norm = 0;
  for (const auto& [k, v] : failing) norm = std::max(norm, v < 0 ? -v : v);
  const Expr d = id.difference();
  std::optional<Assignment> found;
  for (std::int64_t r = 0; r <= std::min(norm, radius_cap) && !found; ++r) {
    for_each_on_shell(vars, r, [&](const Assignment& a) {
      if (eval(d, a) != 0) {
        found = a;
        return true;
      }
      return false;
    });
  }
  return make_counterexample(id, found ? *found : failing);
}

}  // namespace detail

/// Proves or refutes id. Variables are eliminated in declared order (the first
/// listed variable carries the outermost recurrence).
inline Verdict prove(const Identity& id, const ProveOptions& opts = {}) {
  try {
    auto res = detail::prove_level(id, opts, true);
    if (auto* c = std::get_if<Certificate>(&res)) return Proved{std::move(*c)};
    return Refuted{detail::find_counterexample(id, std::get<detail::Failure>(res).at, opts.refutation_radius)};
  } catch (const UnsupportedError& e) {
    return Unsupported{e.what()};
  }
}

// ---------------------------------------------------------------------------
// Checking

struct CheckResult {
  bool ok = true;
  std::string path;    // location of the first problem, e.g. "n=2/r=1"
  std::string reason;
  explicit operator bool() const { return ok; }
};

namespace detail {

inline CheckResult fail_at(const std::string& path, std::string reason) { return {false, path.empty() ? "/" : path, std::move(reason)}; }

inline CheckResult check_level(const Certificate& c, const std::string& path) {
  const Expr d = c.identity.difference();
  const auto vars = free_vars(c.identity);

  if (c.variable.empty()) {
    if (!vars.empty()) return fail_at(path, "variable-free certificate for an identity with variables");
    if (!(c.recurrence == Recurrence::constant())) return fail_at(path, "variable-free certificate needs x(n+1) = x(n)");
    if (c.base_cases.size() != 1 || !c.base_cases[0].numeric() || c.base_cases[0].j != 0)
      return fail_at(path, "variable-free certificate needs exactly one numeric base case");
    if (c.base_cases[0].value != 0) return fail_at(path, "recorded value is not zero");
    if (eval(d, {}) != 0) return fail_at(path, "identity does not evaluate to zero");
    if (c.coverage != Coverage::AllIntegers) return fail_at(path, "coverage mismatch");
    return {};
  }

  const Recurrence& rec = c.recurrence;
  if (c.base_cases.size() != rec.order())
    return fail_at(path, "base case count " + std::to_string(c.base_cases.size()) + " != recurrence order " +
                             std::to_string(rec.order()));

  bool all_integers = rec.backward_extensible();
  for (std::size_t j = 0; j < c.base_cases.size(); ++j) {
    const BaseCase& bc = c.base_cases[j];
    const std::string here = path + "/" + c.variable + "=" + std::to_string(j);
    if (bc.j != static_cast<std::int64_t>(j)) return fail_at(here, "base cases out of order");
    const Identity sub = substitute(c.identity, c.variable, bc.j);
    if (free_vars(sub).empty()) {
      if (!bc.numeric()) return fail_at(here, "expected a numeric base case");
      if (bc.value != 0) return fail_at(here, "recorded value " + bc.value.get_str() + " is not zero");
      const Scalar v = eval(sub.difference(), {});
      if (v != 0) return fail_at(here, "base case evaluates to " + v.get_str());
    } else {
      if (bc.numeric()) return fail_at(here, "expected a nested certificate, variables remain");
      if (to_string(bc.nested->identity) != to_string(sub))
        return fail_at(here, "nested identity '" + to_string(bc.nested->identity) + "' is not the substitution '" +
                                 to_string(sub) + "'");
      if (auto r = check_level(*bc.nested, here); !r) return r;
      all_integers = all_integers && bc.nested->coverage == Coverage::AllIntegers;
    }
  }

  // Sampled annihilation of each side along the certificate variable.
  std::vector<std::string> others;
  for (const auto& v : vars)
    if (v != c.variable) others.push_back(v);
  const std::size_t samples = others.empty() ? 1 : 3;
  for (std::size_t s = 0; s < samples; ++s) {
    const Assignment base = sample_assignment(others, s);
    for (const Expr* side : {&c.identity.lhs, &c.identity.rhs}) {
      const TermWindow w = tabulate(*side, c.variable, base, 0, 2 * rec.order() + kCheckGuard);
      if (!is_annihilated(w, rec))
        return fail_at(path, "recurrence does not annihilate " + std::string(side == &c.identity.lhs ? "lhs" : "rhs") +
                                 " along " + c.variable);
    }
  }

  if (c.minimization) {
    const auto& m = *c.minimization;
    if (m.residuals.size() != 2) return fail_at(path, "minimization needs residual certificates for lhs and rhs");
    const Expr* sides[] = {&c.identity.lhs, &c.identity.rhs};
    for (std::size_t i = 0; i < 2; ++i) {
      const std::string here = path + "/residual:" + (i == 0 ? "lhs" : "rhs");
      const Identity expected = residual_identity(c.identity, *sides[i], c.variable, rec);
      if (to_string(m.residuals[i]->identity) != to_string(expected))
        return fail_at(here, "residual identity does not match the stated recurrence");
      if (auto r = check_level(*m.residuals[i], here); !r) return r;
      all_integers = all_integers && m.residuals[i]->coverage == Coverage::AllIntegers;
    }
  }

  const Coverage expected = all_integers ? Coverage::AllIntegers : Coverage::Nonnegative;
  if (c.coverage != expected) return fail_at(path, "coverage claim should be " + to_string(expected));

  auto ordered = ordered_vars(c.identity);
  for (const auto& p : witness_points(ordered, c.witness_terms, c.coverage, to_string(c.identity)))
    if (eval(d, p) != 0) return fail_at(path, "witness point fails");
  return {};
}

}  // namespace detail

/// Re-validates a certificate: base cases re-evaluated, nested identities
/// matched against the substitutions they claim to be, recurrences checked
/// for annihilation on sampled windows, coverage recomputed.
inline CheckResult check_certificate(const Certificate& c) {
  try {
    return detail::check_level(c, "");
  } catch (const std::exception& e) {
    return {false, "/", std::string("checker error: ") + e.what()};
  }
}

/// Total number of numeric leaves in a certificate tree.
inline std::size_t leaf_count(const Certificate& c) {
  std::size_t n = 0;
  for (const auto& b : c.base_cases) n += b.numeric() ? 1 : leaf_count(*b.nested);
  return n;
}

// ---------------------------------------------------------------------------
// Construction of identities from a basis

struct Construction {
  std::vector<Scalar> coefficients;
  Identity identity;
  Certificate certificate;
};

/// Finds c with target = sum c_i basis_i by matching order-many initial
/// values of a common recurrence, then proves the resulting identity.
inline std::optional<Construction> construct_identity(const Expr& target, const std::vector<Expr>& basis,
                                                      const std::string& var, const ProveOptions& opts = {}) {
  auto single_var = [&](const Expr& e) {
    for (const auto& v : free_vars(e))
      if (v != var) throw UsageError("construct_identity: '" + to_string(e) + "' mentions '" + v + "' besides " + var);
  };
  single_var(target);
  for (const auto& b : basis) single_var(b);
  if (basis.empty()) throw UsageError("construct_identity: empty basis");

  Recurrence common = recurrence_of(target, var);
  for (const auto& b : basis) common = rec_add(common, recurrence_of(b, var));

  const std::size_t k = common.order();
  Matrix a(k, basis.size());
  std::vector<Scalar> rhs(k);
  for (std::size_t j = 0; j < k; ++j) {
    const Assignment at{{var, static_cast<std::int64_t>(j)}};
    rhs[j] = eval(target, at);
    for (std::size_t i = 0; i < basis.size(); ++i) a(j, i) = eval(basis[i], at);
  }
  auto coeffs = solve_linear(a, rhs);
  if (!coeffs) return std::nullopt;

  std::optional<Expr> combo;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Scalar& c = (*coeffs)[i];
    if (c == 0) continue;
    const Scalar mag = abs(c);
    Expr term = mag == 1 ? basis[i] : Expr::scale(mag, basis[i]);
    if (!combo) combo = c < 0 ? Expr::neg(term) : term;
    else combo = c < 0 ? Expr::sub(*combo, term) : Expr::add(*combo, term);
  }
  Identity id{"constructed", {var}, target, combo ? *combo : Expr::constant(0)};
  Verdict v = prove(id, opts);
  auto* proved = std::get_if<Proved>(&v);
  if (!proved) throw std::logic_error("construct_identity: solved combination failed to prove: " + to_string(id));
  return Construction{std::move(*coeffs), std::move(id), std::move(proved->certificate)};
}

}  // namespace fibid
