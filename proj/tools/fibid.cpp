// fibid: prove, refute, discover and construct Fibonacci/Lucas identities,
// and explore the trivalent graph of F-triples.
//
// Exit status: 0 proved/success, 1 refuted/mismatch/nothing found,
// 2 usage error or unsupported input.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fibid/fibid.hpp"

namespace {

using namespace fibid;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;

struct Globals {
  bool json = false;
  bool quiet = false;
  std::size_t fib_table = kDefaultFibTable;
};

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  for (auto& part : detail::split(s, sep))
    if (!part.empty()) out.push_back(std::move(part));
  return out;
}

Assignment parse_assignment(const std::string& text) {
  Assignment a;
  for (const auto& item : split_list(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("assignment item '" + item + "' is not var=value");
    const std::string var = detail::trim(item.substr(0, eq));
    const std::string val = detail::trim(item.substr(eq + 1));
    try {
      std::size_t used = 0;
      const long long v = std::stoll(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      a[var] = v;
    } catch (const std::exception&) {
      throw UsageError("value for '" + var + "' is not an integer: '" + val + "'");
    }
  }
  return a;
}

std::string assignment_text(const Assignment& a) {
  std::string s;
  for (const auto& [k, v] : a) s += (s.empty() ? "" : ", ") + k + "=" + std::to_string(v);
  return s.empty() ? "(no variables)" : s;
}

void print_certificate(std::ostream& os, const Certificate& c, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (c.variable.empty()) {
    os << pad << "evaluates to 0\n";
    return;
  }
  os << pad << c.variable << ": " << c.recurrence.to_string(c.variable) << "  [" << to_string(c.coverage) << "]";
  if (c.minimization) os << "  (minimized from order " << c.minimization->composed.order() << ")";
  os << "\n";
  for (const auto& b : c.base_cases) {
    os << pad << "  " << c.variable << "=" << b.j << ": ";
    if (b.numeric()) {
      os << "0\n";
    } else {
      os << to_string(b.nested->identity) << "\n";
      print_certificate(os, *b.nested, indent + 4);
    }
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_prove(const Globals& g, const std::string& text, const std::string& vars, bool minimize,
              const std::string& rewrite, const std::string& cert_out) {
  std::optional<std::vector<std::string>> declared;
  if (!vars.empty()) declared = split_list(vars, ',');
  Identity id = parse_identity(text, declared, "cli");
  if (!rewrite.empty()) id = change_vars(id, parse_variable_map(rewrite));
  const Verdict v = prove(id, ProveOptions{.minimize = minimize});

  if (const auto* p = std::get_if<Proved>(&v); p && !cert_out.empty()) write_json_file(cert_out, to_json(p->certificate));

  if (g.json) {
    Json j = to_json(v);
    j["identity"] = to_string(id);
    std::cout << j.dump(2) << "\n";
  } else if (g.quiet) {
    std::cout << verdict_name(v) << "\n";
  } else if (const auto* p = std::get_if<Proved>(&v)) {
    std::cout << "proved: " << to_string(id) << "\n";
    print_certificate(std::cout, p->certificate, 2);
    std::cout << "  " << leaf_count(p->certificate) << " numeric base cases, coverage "
              << to_string(p->certificate.coverage) << "\n";
  } else if (const auto* r = std::get_if<Refuted>(&v)) {
    const auto& ce = r->counterexample;
    std::cout << "refuted: " << to_string(id) << "\n  counterexample " << assignment_text(ce.assignment)
              << ": lhs = " << to_string(ce.lhs_value) << ", rhs = " << to_string(ce.rhs_value) << "\n";
  } else {
    std::cout << "unsupported: " << std::get<Unsupported>(v).reason << "\n";
  }
  if (std::holds_alternative<Proved>(v)) return kOk;
  return std::holds_alternative<Refuted>(v) ? kNegative : kUsage;
}

int cmd_check(const Globals& g, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read certificate '" + path + "'");
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::exception& e) {
    throw UsageError(std::string("certificate is not valid JSON: ") + e.what());
  }
  Certificate c;
  try {
    c = certificate_from_json(j);
  } catch (const Json::exception& e) {
    throw UsageError(std::string("malformed certificate: ") + e.what());
  }
  const CheckResult r = check_certificate(c);
  if (g.json) {
    std::cout << Json{{"valid", r.ok}, {"path", r.path}, {"reason", r.reason}}.dump(2) << "\n";
  } else if (r.ok) {
    std::cout << "valid: " << to_string(c.identity) << "\n";
  } else {
    std::cout << "invalid at " << r.path << ": " << r.reason << "\n";
  }
  return r.ok ? kOk : kNegative;
}

int cmd_eval(const Globals& g, const std::string& text, const std::string& at_text) {
  const Assignment at = parse_assignment(at_text);
  if (text.find('=') != std::string::npos) {
    const Identity id = parse_identity(text);
    const Scalar l = eval(id.lhs, at), r = eval(id.rhs, at);
    if (g.json) std::cout << Json{{"lhs", to_string(l)}, {"rhs", to_string(r)}, {"equal", l == r}}.dump(2) << "\n";
    else std::cout << to_string(l) << (l == r ? " = " : " != ") << to_string(r) << "\n";
    return l == r ? kOk : kNegative;
  }
  const Scalar v = eval(parse_expr(text), at);
  if (g.json) std::cout << Json{{"value", to_string(v)}}.dump(2) << "\n";
  else std::cout << to_string(v) << "\n";
  return kOk;
}

std::vector<Scalar> read_terms(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read terms file '" + path + "'");
  std::vector<Scalar> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(f, line);) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      out.push_back(parse_scalar(t));
    } catch (const std::exception&) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": not an exact rational: '" + t + "'");
    }
  }
  return out;
}

int cmd_discover(const Globals& g, const std::string& text, const std::string& terms_file, const std::string& var_opt,
                 const std::string& at_text, std::int64_t from, std::optional<std::size_t> max_order_opt,
                 std::size_t guard) {
  if (text.empty() == terms_file.empty()) throw UsageError("discover needs exactly one of an expression or --terms");
  TermWindow w;
  std::string var = var_opt;
  if (!terms_file.empty()) {
    w.terms = read_terms(terms_file);
    if (var.empty()) var = "n";
  } else {
    const Expr e = parse_expr(text);
    const Assignment others = parse_assignment(at_text);
    if (var.empty()) {
      for (const auto& v : free_vars(e))
        if (!others.count(v)) {
          if (!var.empty()) throw UsageError("expression has several free variables; pass --var and --at");
          var = v;
        }
      if (var.empty()) var = "n";
    }
    for (const auto& v : free_vars(e))
      if (v != var && !others.count(v)) throw UsageError("no value for '" + v + "'; pass --at " + v + "=...");
    w = tabulate(e, var, others, from, 2 * max_order_opt.value_or(kDefaultMaxOrder) + guard);
  }
  std::size_t max_order = max_order_opt.value_or(kDefaultMaxOrder);
  if (!max_order_opt && w.terms.size() < 2 * max_order + guard) {
    if (w.terms.size() < 2 + guard)
      throw UsageError("need at least " + std::to_string(2 + guard) + " terms, got " + std::to_string(w.terms.size()));
    max_order = (w.terms.size() - guard) / 2;
  }
  const auto r = find_min_recurrence(w, max_order, guard);
  if (!r) {
    if (g.json) std::cout << Json{{"found", false}, {"maxOrder", max_order}}.dump(2) << "\n";
    else std::cout << "none up to maxOrder " << max_order << "\n";
    return kNegative;
  }
  if (g.json) {
    Json j = recurrence_to_json(*r);
    j["found"] = true;
    Json desc = Json::array();
    for (const auto& c : r->descending()) desc.push_back(to_string(c));
    j["descending"] = std::move(desc);
    j["text"] = r->to_string(var);
    std::cout << j.dump(2) << "\n";
  } else if (g.quiet) {
    std::cout << r->order() << "\n";
  } else {
    std::cout << "order " << r->order() << ": " << r->to_string(var) << "\n  coefficients (descending):";
    for (const auto& c : r->descending()) std::cout << " " << to_string(c);
    std::cout << "\n";
  }
  return kOk;
}

int cmd_construct(const Globals& g, const std::string& target_text, const std::vector<std::string>& basis_text,
                  const std::string& var_opt) {
  if (basis_text.empty()) throw UsageError("construct needs at least one --basis expression");
  const Expr target = parse_expr(target_text);
  std::vector<Expr> basis;
  for (const auto& b : basis_text) basis.push_back(parse_expr(b));
  std::string var = var_opt;
  if (var.empty()) {
    const auto fv = free_vars(target);
    var = fv.empty() ? "n" : fv.front();
  }
  const auto c = construct_identity(target, basis, var);
  if (!c) {
    if (g.json) std::cout << Json{{"found", false}}.dump(2) << "\n";
    else std::cout << "no integer-linear combination\n";
    return kNegative;
  }
  if (g.json) {
    Json coeffs = Json::array();
    for (const auto& x : c->coefficients) coeffs.push_back(to_string(x));
    std::cout << Json{{"found", true}, {"coefficients", coeffs}, {"identity", to_string(c->identity)},
                      {"certificate", to_json(c->certificate)}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "coefficients:";
    for (const auto& x : c->coefficients) std::cout << " " << to_string(x);
    std::cout << "\n" << (g.quiet ? "" : "proved: ") << to_string(c->identity) << "\n";
  }
  return kOk;
}

int cmd_corpus(const Globals& g, const std::string& filter, bool sequential, bool minimize, const std::string& cert_dir,
               const std::string& extra_file) {
  auto all = full_corpus();
  if (!extra_file.empty()) {
    auto extra = load_corpus_file(extra_file);
    all.insert(all.end(), extra.begin(), extra.end());
  }
  const auto entries = filter_corpus(all, filter);
  RunReport rep = run_corpus(entries, ProveOptions{.minimize = minimize}, !sequential);

  if (!cert_dir.empty()) {
    std::filesystem::create_directories(cert_dir);
    for (auto& r : rep.results)
      if (const auto* p = std::get_if<Proved>(&r.verdict)) {
        r.certificate_path = (std::filesystem::path(cert_dir) / (r.entry.name + ".json")).string();
        write_json_file(r.certificate_path, to_json(p->certificate));
      }
  }

  if (g.json) {
    Json results = Json::array();
    for (const auto& r : rep.results) {
      Json j{{"name", r.entry.name},
             {"identity", r.entry.identity_text},
             {"expected", to_string(r.entry.expected)},
             {"verdict", verdict_name(r.verdict)},
             {"outcome", to_string(r.outcome)},
             {"millis", r.millis}};
      if (!r.entry.rewrite.empty()) j["rewrite"] = r.entry.rewrite;
      if (const auto* f = std::get_if<Refuted>(&r.verdict)) j["counterexample"] = to_json(f->counterexample);
      if (const auto* u = std::get_if<Unsupported>(&r.verdict)) j["reason"] = u->reason;
      if (std::holds_alternative<Proved>(r.verdict)) j["certificateChecks"] = r.certificate_checks;
      if (!r.certificate_path.empty()) j["certificate"] = r.certificate_path;
      results.push_back(std::move(j));
    }
    std::cout << Json{{"entries", results},
                      {"summary",
                       {{"total", rep.results.size()},
                        {"ok", rep.count(Outcome::Match)},
                        {"mismatch", rep.count(Outcome::Mismatch)},
                        {"reported", rep.count(Outcome::Reported)},
                        {"wallMillis", rep.wall_millis}}}}
                     .dump(2)
              << "\n";
  } else {
    for (const auto& r : rep.results) {
      if (g.quiet && r.outcome != Outcome::Mismatch) continue;
      std::cout << std::left << std::setw(24) << r.entry.name << std::setw(12) << verdict_name(r.verdict)
                << std::setw(10) << to_string(r.outcome);
      if (const auto* f = std::get_if<Refuted>(&r.verdict)) std::cout << " at " << assignment_text(f->counterexample.assignment);
      if (const auto* u = std::get_if<Unsupported>(&r.verdict)) std::cout << " " << u->reason;
      std::cout << "\n";
    }
    std::cout << rep.results.size() << " entries: " << rep.count(Outcome::Match) << " ok, " << rep.count(Outcome::Mismatch)
              << " mismatched, " << rep.count(Outcome::Reported) << " reported\n";
  }
  return rep.ok() ? kOk : kNegative;
}

Triple parse_seed(const std::string& text) {
  std::string cleaned;
  for (char c : text)
    if (c != '(' && c != ')' && c != ' ') cleaned.push_back(c);
  const auto parts = split_list(cleaned, ';');
  if (parts.size() != 3) throw UsageError("seed needs three vectors separated by ';'");
  std::array<Vec3, 3> v;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto xs = split_list(parts[i], ',');
    if (xs.size() != 3) throw UsageError("seed vector '" + parts[i] + "' needs three integers");
    for (std::size_t k = 0; k < 3; ++k) {
      try {
        v[i][k] = Integer(xs[k]);
      } catch (const std::exception&) {
        throw UsageError("seed entry '" + xs[k] + "' is not an integer");
      }
    }
  }
  return {v[0], v[1], v[2]};
}

int cmd_graph(const Globals& g, const std::string& seed_text, std::size_t terms, std::size_t depth, bool scan, bool dot,
              bool strict) {
  const Triple seed = seed_text.empty() ? canonical_seed() : parse_seed(seed_text);
  if (!is_f_triple(seed, strict)) throw DomainError("seed is not an F-triple");
  if (dot) {
    write_graph_dot(std::cout, seed, depth);
    return kOk;
  }
  const auto seq = f_sequence(seed.u, seed.v, seed.w, std::max<std::size_t>(terms, 3));
  std::optional<ObservationReport> report;
  if (scan) report = scan_observations(seq, g.fib_table);

  if (g.json) {
    Json s = Json::array();
    for (const auto& v : seq) s.push_back(to_json(v));
    std::cout << "{\"sequence\":" << s.dump() << ",\n\"graph\":";
    write_graph_json(std::cout, seed, depth);
    if (report) std::cout << ",\"observations\":" << to_json(*report).dump(2);
    std::cout << "}\n";
  } else {
    std::cout << "sequence:\n";
    for (std::size_t i = 0; i < seq.size(); ++i) std::cout << "  e" << i + 1 << " = " << seq[i] << "\n";
    std::cout << "graph (depth " << depth << "):\n";
    expand_graph_stream(seed, depth, [&](const TriGraphNode& n, std::size_t index) {
      std::cout << "  #" << index << " depth " << n.depth;
      if (n.parent) std::cout << " from #" << *n.parent;
      std::cout << ": {" << n.triple.u << ", " << n.triple.v << ", " << n.triple.w << "}\n";
    }, strict);
    if (report) {
      std::cout << "observations:\n";
      for (const auto& f : report->findings) {
        std::cout << "  (" << f.key << ") " << (f.holds ? "holds" : "FAILS") << ": " << f.description << "\n";
        if (!g.quiet)
          for (const auto& n : f.notes) std::cout << "      " << n << "\n";
      }
      std::cout << "  closed form (-F_kF_{k+1}, F_kF_{k+2}, F_{k+1}F_{k+2}): ";
      if (report->closed_form_break) std::cout << "breaks at e" << *report->closed_form_break << "\n";
      else std::cout << "holds for all " << seq.size() << " terms\n";
    }
  }
  return report && !report->all_hold() ? kNegative : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prove, refute, discover and construct Fibonacci/Lucas identities."};
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "Machine-readable JSON output");
  app.add_flag("--quiet", g.quiet, "Terse output");
  app.add_option("--seed-table-size", g.fib_table, "Fibonacci table size for the graph scanner")->check(CLI::Range(2, 10000));

  std::string text, vars, rewrite, cert_out, at, terms_file, var, filter, cert_dir, extra, seed, path;
  bool minimize = false, sequential = false, scan = false, dot = false, strict = false;
  std::int64_t from = 0;
  std::optional<std::size_t> max_order;
  std::size_t guard = kDefaultGuard, terms = 9, depth = 0;
  std::vector<std::string> basis;

  auto* prove_cmd = app.add_subcommand("prove", "Prove or refute an identity");
  prove_cmd->add_option("identity", text, "Identity, e.g. \"F[n+1]*F[n-1] - F[n]^2 = (-1)^(n)\"")->required();
  prove_cmd->add_option("--vars", vars, "Comma-separated variables; the first is eliminated first");
  prove_cmd->add_flag("--minimize", minimize, "Use numerically discovered smaller recurrences, each proved safe");
  prove_cmd->add_option("--rewrite", rewrite, "Change of variables applied first, e.g. m=r-n");
  prove_cmd->add_option("--certificate-out", cert_out, "Write the certificate JSON to this file");

  auto* check_cmd = app.add_subcommand("check-certificate", "Validate a certificate JSON file");
  check_cmd->add_option("file", path, "Certificate file")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate an expression or both sides of an identity");
  eval_cmd->add_option("expression", text, "Expression or identity")->required();
  eval_cmd->add_option("--at", at, "Assignment, e.g. n=7,r=3");

  auto* disc_cmd = app.add_subcommand("discover", "Find the minimal recurrence of an expression or a terms file");
  disc_cmd->add_option("expression", text, "Expression in one variable");
  disc_cmd->add_option("--terms", terms_file, "File with one exact rational per line");
  disc_cmd->add_option("--var", var, "Sequence variable");
  disc_cmd->add_option("--at", at, "Values for the other variables");
  disc_cmd->add_option("--from", from, "First index tabulated");
  disc_cmd->add_option("--max-order", max_order, "Largest order tried (default 16)")->check(CLI::Range(1, 64));
  disc_cmd->add_option("--guard", guard, "Extra terms that must agree");

  auto* cons_cmd = app.add_subcommand("construct", "Express a target as a combination of basis expressions");
  cons_cmd->add_option("target", text, "Target expression")->required();
  cons_cmd->add_option("--basis", basis, "Basis expression (repeatable)")->required();
  cons_cmd->add_option("--var", var, "Sequence variable");

  auto* corpus_cmd = app.add_subcommand("corpus", "Run the built-in identity corpus");
  corpus_cmd->add_option("--filter", filter, "Only entries whose name contains this text");
  corpus_cmd->add_flag("--sequential", sequential, "Run entries one at a time");
  corpus_cmd->add_flag("--minimize", minimize, "Prove with minimized recurrences");
  corpus_cmd->add_option("--certificates", cert_dir, "Write certificates of proved entries to this directory");
  corpus_cmd->add_option("--file", extra, "Additional corpus file");

  auto* graph_cmd = app.add_subcommand("graph", "Generate the zigzag sequence and the trivalent graph");
  graph_cmd->add_option("--seed", seed, "Three vectors, e.g. \"(1,0,0);(0,1,0);(0,0,1)\"");
  graph_cmd->add_option("--terms", terms, "Sequence length");
  graph_cmd->add_option("--depth", depth, "Graph expansion depth");
  graph_cmd->add_flag("--scan", scan, "Report the numeric observations");
  graph_cmd->add_flag("--dot", dot, "Graphviz output of the expansion");
  graph_cmd->add_flag("--strict", strict, "Require each coordinate sum to be a perfect square");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*prove_cmd) return cmd_prove(g, text, vars, minimize, rewrite, cert_out);
    if (*check_cmd) return cmd_check(g, path);
    if (*eval_cmd) return cmd_eval(g, text, at);
    if (*disc_cmd) return cmd_discover(g, text, terms_file, var, at, from, max_order, guard);
    if (*cons_cmd) return cmd_construct(g, text, basis, var);
    if (*corpus_cmd) return cmd_corpus(g, filter, sequential, minimize, cert_dir, extra);
    if (*graph_cmd) return cmd_graph(g, seed, terms, depth, scan, dot, strict);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
