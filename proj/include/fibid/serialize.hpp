#pragma once

// JSON for certificates, verdicts and graphs; Graphviz text for graphs.
// Rationals travel as "p/q" strings so exactness survives the round trip.

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fibid/closure.hpp"
#include "fibid/parser.hpp"
#include "fibid/prover.hpp"
#include "fibid/trigraph.hpp"

namespace fibid {

using Json = nlohmann::ordered_json;

inline Json recurrence_to_json(const Recurrence& r) {
  Json coeffs = Json::array();
  for (const auto& c : r.coeffs()) coeffs.push_back(to_string(c));
  return {{"order", r.order()}, {"coeffs", std::move(coeffs)}};
}

inline Recurrence recurrence_from_json(const Json& j) {
  std::vector<Scalar> coeffs;
  for (const auto& c : j.at("coeffs")) coeffs.push_back(parse_scalar(c.get<std::string>()));
  if (j.at("order").get<std::size_t>() != coeffs.size())
    throw UsageError("recurrence order " + j.at("order").dump() + " disagrees with " + std::to_string(coeffs.size()) +
                     " coefficients");
  return Recurrence(std::move(coeffs));
}

inline Json to_json(const Certificate& c) {
  Json j;
  j["identity"] = to_string(c.identity);
  j["variables"] = c.identity.variables;
  j["variable"] = c.variable;
  j["recurrence"] = recurrence_to_json(c.recurrence);
  j["coverage"] = to_string(c.coverage);
  Json cases = Json::array();
  for (const auto& b : c.base_cases) {
    if (b.numeric()) cases.push_back({{"j", b.j}, {"kind", "zero"}, {"value", to_string(b.value)}});
    else cases.push_back({{"j", b.j}, {"kind", "nested"}, {"certificate", to_json(*b.nested)}});
  }
  j["baseCases"] = std::move(cases);
  j["witnessTerms"] = c.witness_terms;
  if (c.minimization) {
    Json res = Json::array();
    for (const auto& r : c.minimization->residuals) res.push_back(to_json(*r));
    j["minimization"] = {{"composed", recurrence_to_json(c.minimization->composed)}, {"residuals", std::move(res)}};
  }
  return j;
}

inline Certificate certificate_from_json(const Json& j) {
  std::optional<std::vector<std::string>> vars;
  if (j.contains("variables")) vars = j.at("variables").get<std::vector<std::string>>();
  Certificate c;
  c.identity = parse_identity(j.at("identity").get<std::string>(), vars);
  c.variable = j.at("variable").get<std::string>();
  c.recurrence = recurrence_from_json(j.at("recurrence"));
  const auto cov = j.at("coverage").get<std::string>();
  if (cov == "all-integers") c.coverage = Coverage::AllIntegers;
  else if (cov == "nonnegative") c.coverage = Coverage::Nonnegative;
  else throw UsageError("unknown coverage '" + cov + "'");
  for (const auto& b : j.at("baseCases")) {
    BaseCase bc;
    bc.j = b.at("j").get<std::int64_t>();
    const auto kind = b.at("kind").get<std::string>();
    if (kind == "zero") bc.value = parse_scalar(b.at("value").get<std::string>());
    else if (kind == "nested") bc.nested = std::make_shared<const Certificate>(certificate_from_json(b.at("certificate")));
    else throw UsageError("unknown base case kind '" + kind + "'");
    c.base_cases.push_back(std::move(bc));
  }
  c.witness_terms = j.at("witnessTerms").get<std::size_t>();
  if (j.contains("minimization")) {
    const Json& m = j.at("minimization");
    Minimization mm{recurrence_from_json(m.at("composed")), {}};
    for (const auto& r : m.at("residuals")) mm.residuals.push_back(std::make_shared<const Certificate>(certificate_from_json(r)));
    c.minimization = std::move(mm);
  }
  return c;
}

inline Json to_json(const Counterexample& ce) {
  Json at = Json::object();
  for (const auto& [k, v] : ce.assignment) at[k] = v;
  return {{"assignment", std::move(at)}, {"lhs", to_string(ce.lhs_value)}, {"rhs", to_string(ce.rhs_value)}};
}

inline Json to_json(const Verdict& v) {
  if (const auto* p = std::get_if<Proved>(&v)) return {{"verdict", "proved"}, {"certificate", to_json(p->certificate)}};
  if (const auto* r = std::get_if<Refuted>(&v)) return {{"verdict", "refuted"}, {"counterexample", to_json(r->counterexample)}};
  return {{"verdict", "unsupported"}, {"reason", std::get<Unsupported>(v).reason}};
}

// ---------------------------------------------------------------------------
// Graphs

inline Json to_json(const Vec3& v) { return Json::array({v[0].get_str(), v[1].get_str(), v[2].get_str()}); }

inline Json to_json(const Triple& t) { return Json::array({to_json(t.u), to_json(t.v), to_json(t.w)}); }

inline Json node_to_json(const TriGraphNode& n, std::size_t index) {
  Json j{{"id", index}, {"depth", n.depth}, {"triple", to_json(n.triple)}};
  j["parent"] = n.parent ? Json(*n.parent) : Json(nullptr);
  return j;
}

inline Json to_json(const ObservationReport& r) {
  Json findings = Json::array();
  for (const auto& f : r.findings)
    findings.push_back({{"key", f.key}, {"description", f.description}, {"holds", f.holds}, {"notes", f.notes}});
  Json conv = Json::array();
  for (const auto& c : r.first_entry_conventions) conv.push_back({{"start", c.start}, {"lengths", c.lengths}, {"checked", c.checked}});
  Json fp = Json::array();
  for (const auto& i : r.fourth_powers)
    fp.push_back({{"first", i.first}, {"second", i.second}, {"a", i.a.get_str()}, {"A", i.big_a.get_str()}, {"base", i.base.get_str()}});
  return {{"findings", std::move(findings)},
          {"firstEntryConventions", std::move(conv)},
          {"fourthPowers", std::move(fp)},
          {"closedFormBreak", r.closed_form_break ? Json(*r.closed_form_break) : Json(nullptr)}};
}

/// Streams {"nodes":[...],"edges":[...]} one node at a time. Edges are
/// written after the nodes, so only (parent, child) index pairs are buffered.
inline void write_graph_json(std::ostream& os, const Triple& seed, std::size_t depth) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  os << "{\"nodes\":[";
  bool first = true;
  expand_graph_stream(seed, depth, [&](const TriGraphNode& n, std::size_t index) {
    os << (first ? "\n" : ",\n") << node_to_json(n, index).dump();
    first = false;
    if (n.parent) edges.emplace_back(*n.parent, index);
  });
  os << "\n],\"edges\":[";
  first = true;
  for (const auto& [a, b] : edges) {
    os << (first ? "\n" : ",\n") << "{\"from\":" << a << ",\"to\":" << b << "}";
    first = false;
  }
  os << "\n]}\n";
}

inline std::string dot_label(const Triple& t) {
  return t.u.to_string() + "\\n" + t.v.to_string() + "\\n" + t.w.to_string();
}

/// Plain `graph { a -- b; }` rendering, streamed.
inline void write_graph_dot(std::ostream& os, const Triple& seed, std::size_t depth) {
  os << "graph {\n";
  expand_graph_stream(seed, depth, [&](const TriGraphNode& n, std::size_t index) {
    os << "  n" << index << " [label=\"" << dot_label(n.triple) << "\"];\n";
    if (n.parent) os << "  n" << *n.parent << " -- n" << index << ";\n";
  });
  os << "}\n";
}

}  // namespace fibid
