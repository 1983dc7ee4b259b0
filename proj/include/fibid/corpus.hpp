#pragma once

// Identity corpus: a line format, a built-in collection and a parallel runner.
//
// Line format:  name | vars | identity | expected [| rewrite]
//   vars      comma-separated elimination order (may be empty)
//   expected  true, false or unknown
//   rewrite   optional change of variables applied before proving, e.g. m=r-n
// Blank lines and lines starting with '#' are ignored.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fibid/errors.hpp"
#include "fibid/expr.hpp"
#include "fibid/parser.hpp"
#include "fibid/prover.hpp"

namespace fibid {

enum class Expected { True, False, Unknown };

inline std::string to_string(Expected e) {
  switch (e) {
    case Expected::True: return "true";
    case Expected::False: return "false";
    case Expected::Unknown: return "unknown";
  }
  return "?";
}

struct CorpusEntry {
  std::string name;
  std::vector<std::string> variables;
  std::string identity_text;
  Expected expected = Expected::True;
  std::string rewrite;  // empty when none
  std::string origin;   // "built-in" or the file it came from

  /// The identity that is actually proved (after the rewrite, if any).
  Identity identity() const {
    Identity id = parse_identity(identity_text, variables, name);
    if (!rewrite.empty()) id = change_vars(id, parse_variable_map(rewrite));
    return id;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = s.find(sep, start);
    out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
    if (p == std::string_view::npos) return out;
    start = p + 1;
  }
}

}  // namespace detail

inline std::vector<CorpusEntry> parse_corpus(std::string_view text, const std::string& origin) {
  std::vector<CorpusEntry> out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto where = [&] { return origin + ":" + std::to_string(line_no); };
    const auto fields = detail::split(t, '|');
    if (fields.size() != 4 && fields.size() != 5)
      throw UsageError(where() + ": expected 'name | vars | identity | expected [| rewrite]'");
    CorpusEntry e;
    e.name = fields[0];
    if (e.name.empty()) throw UsageError(where() + ": empty name");
    if (!fields[1].empty())
      for (auto& v : detail::split(fields[1], ',')) e.variables.push_back(std::move(v));
    e.identity_text = fields[2];
    if (fields[3] == "true") e.expected = Expected::True;
    else if (fields[3] == "false") e.expected = Expected::False;
    else if (fields[3] == "unknown") e.expected = Expected::Unknown;
    else throw UsageError(where() + ": expected must be true, false or unknown, got '" + fields[3] + "'");
    if (fields.size() == 5) e.rewrite = fields[4];
    e.origin = origin;
    try {
      (void)e.identity();
    } catch (const UsageError& err) {
      throw UsageError(where() + ": " + err.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<CorpusEntry> load_corpus_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read corpus file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_corpus(ss.str(), path);
}

inline constexpr std::string_view kBuiltinCorpus = R"(
# Two-term identities and their classical relatives.
tagiuri               | n,a,b | F[n+a]*F[n+b] - F[n]*F[n+a+b] = (-1)^(n)*F[a]*F[b]          | true
square-shift          | n     | F[n+1]^2 = 4*F[n]*F[n-1] + F[n-2]^2                           | true
lucas-fib-squares     | n     | L[n]^2 - 5*F[n]^2 = 4*(-1)^(n)                                | true
cassini-odd-sign      | n     | F[n-1]*F[n+1] - F[n]^2 = (-1)^(n-1)                           | false
cassini               | n     | F[n-1]*F[n+1] - F[n]^2 = (-1)^(n)                             | true
product-via-lucas     | m,n   | F[m]*F[n] = 1/5*(L[m+n] - (-1)^(n)*L[m-n])                    | true    | m=r-n
square-via-lucas      | n     | F[n]^2 = 1/5*(L[2*n] - 2*(-1)^(n))                            | true
addition-formula      | m,n   | F[n+m] = F[n-1]*F[m] + F[n]*F[m+1]                            | true    | m=r-n
addition-half-lucas   | m,n   | F[m+n] = 1/2*(F[m]*L[n] + L[m]*F[n])                          | true    | m=r-n
melham-squares        | n,k   | F[n+k+1]^2 + F[n-k]^2 = F[2*k+1]*F[2*n+1]                     | true
melham-lucas-squares  | n,k   | L[n+k+1]^2 + L[n-k]^2 = 5*L[2*k+1]*L[2*n+1]                   | unknown
catalan-signed        | n,r   | F[n]^2 + (-1)^(n+r-1)*F[r]^2 = F[n-r]*F[n+r]                  | true
gelin-cesaro          | n     | F[n]^4 - F[n-2]*F[n-1]*F[n+1]*F[n+2] = 1                      | true

# Single-variable table.
double-index-even     | n     | F[2*n] = F[n+1]^2 - F[n-1]^2                                  | true
double-index-odd      | n     | F[2*n+1] = F[n+1]^2 + F[n]^2                                  | true
product-difference    | n     | F[n+2]*F[n-1] = F[n+1]^2 - F[n]^2                             | true
cassini-spread-two    | n     | F[n]^2 - F[n-2]*F[n+2] = (-1)^(n)                             | true
sum-of-squares        | n     | sum(k=1..n, F[k]^2) = F[n]*F[n+1]                             | true
cassini-reversed      | n     | F[n]^2 - F[n-1]*F[n+1] = (-1)^(n-1)                           | true
spread-three-product  | n     | F[n]*F[n+3] = F[n+1]*F[n+2] + (-1)^(n-1)                      | true
square-difference     | n     | F[n]^2 - F[n-1]^2 = F[n]*F[n-1] + (-1)^(n-1)                  | true
odd-index-signed      | n     | F[2*n+1] + (-1)^(n) = F[n-1]*F[n+1] + F[n+1]^2                | true
lucas-odd-auxiliary   | n     | L[2*n+1] - F[n+1]^2 - ((L[n]^2 - F[n-3]*F[n+1]) + F[2*n-2]) = (-1)^(n-1) | unknown
lucas-square-shift    | n     | L[n-1]^2 - F[n-4]*F[n] - F[n]*F[n+1] = F[n-2]^2               | unknown
odd-index-as-printed  | n     | F[2*n+1] = F[n+3]*F[n] - F[n+1]*F[n-1]                        | false

# Catalan and Melham with their base-case identities.
catalan               | n,r   | F[n]^2 - F[n+r]*F[n-r] = (-1)^(n-r)*F[r]^2                    | true
catalan-base-three    | r     | 4*(-1)^(3-r) + F[r+3]*F[r-3] - F[r]^2 = 0                     | true
melham                | n,r   | F[n+r+1]^2 + F[n-r]^2 = F[2*r+1]*F[2*n+1]                     | true
melham-base-zero      | r     | F[r+1]^2 + F[-r]^2 = F[2*r+1]*F[1]                            | true
melham-base-one       | r     | F[r+2]^2 + F[1-r]^2 = F[2*r+1]*F[3]                           | true
melham-base-two       | r     | F[r+3]^2 + F[2-r]^2 = F[2*r+1]*F[5]                           | true
docagne               | m,n   | F[m]*F[n+1] - F[n]*F[m+1] = (-1)^(n)*F[m-n]                   | true    | m=n+r
docagne-shifted       | n,r   | F[n+1]*F[n+r] - F[n]*F[n+r+1] = (-1)^(n)*F[r]                 | true

# Cubic and quartic identities.
melham-cubic          | n     | F[n+1]*F[n+2]*F[n+6] - F[n+3]^3 = (-1)^(n)*F[n]               | true
triple-index-squares  | n     | F[3*n+3] = F[n]*F[n+3]^2 + F[n-1]*F[n+2]^2 - F[n-2]*F[n+1]^2  | true
fg-cubic-as-printed   | n     | F[n-2]*F[n+1]^2 - F[n]^3 = (-1)^(n)*F[n-1]                    | false
fg-cubic              | n     | F[n-2]*F[n+1]^2 - F[n]^3 = (-1)^(n-1)*F[n-1]                  | true
fg-quartic            | n     | F[n-3]*F[n+1]^3 - F[n]^4 = (-1)^(n)*(F[n-1]*F[n+3] + 2*F[n]^2) | true
triple-index-sum      | n     | F[n]*F[n+3]^2 + F[n-1]*F[n+2]^2 - F[n-2]*F[n+1]^2 = F[3*n+3]  | true
triple-index-cubes    | n     | F[3*n] = F[n+1]^3 + F[n]^3 - F[n-1]^3                         | true

# Identities read off the trivalent graph.
graph-pythagorean     | n     | (F[n]*F[n+1])^2 + (F[n]*F[n+2])^2 + (F[n+1]*F[n+2])^2 = (F[n]^2 + F[n+1]*F[n+2])^2 | true
graph-quarter-one     | n     | F[2*n-3]*F[2*n-2] = sum(k=0..n-2, F[4*k+1])                   | true
graph-quarter-two     | n     | F[2*n-3]*F[2*n-1] = 1 + sum(k=0..n-2, F[4*k+2])               | true
graph-quarter-three   | n     | F[2*n-2]*F[2*n-1] = sum(k=0..n-2, F[4*k+3])                   | true
graph-quarter-four    | n     | F[2*n-2]*F[2*n] = sum(k=1..n-1, F[4*k])                       | true

# Membership in recurrences, stated as annihilation identities.
f-function-square     | n     | F[n+6]^2 = 2*(F[n+5]^2 + F[n+4]^2) - F[n+3]^2                 | true
f-function-adjacent   | n     | F[n+6]*F[n+7] = 2*(F[n+5]*F[n+6] + F[n+4]*F[n+5]) - F[n+3]*F[n+4] | true
f-function-lucas      | n     | L[n+6]^2 = 2*(L[n+5]^2 + L[n+4]^2) - L[n+3]^2                 | true
f-function-mixed      | n     | F[n+6]*L[n+6] = 2*(F[n+5]*L[n+5] + F[n+4]*L[n+4]) - F[n+3]*L[n+3] | true
signed-fib-recurrence | n     | (-1)^(n+2)*F[n+2] = -(-1)^(n+1)*F[n+1] + (-1)^(n)*F[n]       | true
)";

inline std::vector<CorpusEntry> builtin_corpus() { return parse_corpus(kBuiltinCorpus, "built-in"); }

/// Built-in entries followed by those of the file named by FIBID_CORPUS, if set.
inline std::vector<CorpusEntry> full_corpus() {
  auto out = builtin_corpus();
  if (const char* path = std::getenv("FIBID_CORPUS"); path && *path) {
    auto extra = load_corpus_file(path);
    out.insert(out.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runner

enum class Outcome { Match, Mismatch, Reported };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Match: return "ok";
    case Outcome::Mismatch: return "MISMATCH";
    case Outcome::Reported: return "reported";
  }
  return "?";
}

struct EntryResult {
  CorpusEntry entry;
  Verdict verdict;
  bool certificate_checks = false;  // only meaningful for Proved
  Outcome outcome = Outcome::Match;
  double millis = 0;
  std::string certificate_path;  // filled in by callers that write certificates
};

struct RunReport {
  std::vector<EntryResult> results;
  double wall_millis = 0;

  std::size_t count(Outcome o) const {
    std::size_t n = 0;
    for (const auto& r : results) n += r.outcome == o;
    return n;
  }
  bool ok() const { return count(Outcome::Mismatch) == 0; }
};

inline std::string verdict_name(const Verdict& v) {
  if (std::holds_alternative<Proved>(v)) return "proved";
  if (std::holds_alternative<Refuted>(v)) return "refuted";
  return "unsupported";
}

inline EntryResult run_entry(const CorpusEntry& e, const ProveOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v = Unsupported{"not run"};
  try {
    v = prove(e.identity(), opts);
  } catch (const std::exception& ex) {
    v = Unsupported{ex.what()};
  }
  EntryResult r{e, v};
  if (const auto* p = std::get_if<Proved>(&r.verdict)) r.certificate_checks = check_certificate(p->certificate).ok;
  r.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const bool proved_ok = std::holds_alternative<Proved>(r.verdict) && r.certificate_checks;
  switch (e.expected) {
    case Expected::True: r.outcome = proved_ok ? Outcome::Match : Outcome::Mismatch; break;
    case Expected::False: r.outcome = std::holds_alternative<Refuted>(r.verdict) ? Outcome::Match : Outcome::Mismatch; break;
    case Expected::Unknown: r.outcome = Outcome::Reported; break;
  }
  return r;
}

/// Runs the entries (concurrently when parallel); results keep entry order.
inline RunReport run_corpus(const std::vector<CorpusEntry>& entries, const ProveOptions& opts = {}, bool parallel = true) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.results.reserve(entries.size());
  if (parallel) {
    std::vector<std::future<EntryResult>> jobs;
    jobs.reserve(entries.size());
    for (const auto& e : entries) jobs.push_back(std::async(std::launch::async, run_entry, std::cref(e), std::cref(opts)));
    for (auto& j : jobs) rep.results.push_back(j.get());
  } else {
    for (const auto& e : entries) rep.results.push_back(run_entry(e, opts));
  }
  rep.wall_millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Entries whose name contains the filter (all entries for an empty filter).
inline std::vector<CorpusEntry> filter_corpus(const std::vector<CorpusEntry>& all, std::string_view filter) {
  std::vector<CorpusEntry> out;
  for (const auto& e : all)
    if (filter.empty() || e.name.find(filter) != std::string::npos) out.push_back(e);
  return out;
}

}  // namespace fibid
