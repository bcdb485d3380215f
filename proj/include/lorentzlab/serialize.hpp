#pragma once

#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lorentzlab/certificates.hpp"
#include "lorentzlab/experiments.hpp"
#include "lorentzlab/norm_search.hpp"
#include "lorentzlab/polynomials.hpp"
#include "lorentzlab/sequences.hpp"
#include "lorentzlab/tensor_duality.hpp"
#include "lorentzlab/weights.hpp"

/* JSON wire formats for every artifact the library emits, plus parsers that
 * rebuild the domain types through their validating constructors, so a
 * re-read artifact re-checks its own invariants. All doubles round-trip
 * bit-exactly through the shortest-representation printer. */

namespace lorentz {

using json = nlohmann::json;

// ---------------------------------------------------------------- weights

inline json to_json(const WeightSequence& w) {
  json j;
  j["n"] = w.size();
  if (w.is_power()) {
    j["kind"] = "power";
    j["a"] = w.exponent();
  } else {
    j["kind"] = "list";
    std::vector<double> vals(w.size());
    for (std::size_t i = 1; i <= w.size(); ++i) vals[i - 1] = w.value(i);
    j["values"] = vals;
  }
  return j;
}

inline WeightSequence weight_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "power")
    return WeightSequence::power(j.at("a").get<double>(), j.at("n").get<std::size_t>());
  if (kind == "list")
    return WeightSequence::from_list(j.at("values").get<std::vector<double>>());
  throw std::invalid_argument("unknown weight kind: " + kind);
}

// ---------------------------------------------------------------- vectors

inline json to_json(const TruncatedVector& x) {
  json j;
  j["coords"] = x.coords();
  if (x.tail()) {
    j["tail"] = {{"c", x.tail()->c}, {"t", x.tail()->t}, {"from", x.materialized() + 1}};
  } else {
    j["tail"] = nullptr;
  }
  return j;
}

inline TruncatedVector vector_from_json(const json& j) {
  std::vector<double> coords = j.at("coords").get<std::vector<double>>();
  std::optional<GeometricTail> tail;
  if (j.contains("tail") && !j.at("tail").is_null()) {
    GeometricTail g;
    g.c = j.at("tail").at("c").get<double>();
    g.t = j.at("tail").at("t").get<double>();
    tail = g;
  }
  return TruncatedVector(std::move(coords), tail);
}

// ----------------------------------------------------------- certificates

inline json to_json(const PerturbationCertificate& c) {
  json j;
  j["n0"] = c.n0;
  j["delta"] = c.delta;
  j["subject"] = to_json(c.subject);
  j["weight_ref"] = to_json(c.weight);
  return j;
}

inline PerturbationCertificate certificate_from_json(const json& j) {
  PerturbationCertificate c;
  c.n0 = j.at("n0").get<std::size_t>();
  c.delta = j.at("delta").get<double>();
  c.subject = vector_from_json(j.at("subject"));
  c.weight = weight_from_json(j.at("weight_ref"));
  return c;
}

// ------------------------------------------------------------ polynomials

inline json to_json(const HomogeneousPolynomial& p) {
  json j;
  j["N"] = p.degree();
  j["n"] = p.dim();
  if (p.target() == HomogeneousPolynomial::Target::Scalar)
    j["target"] = "scalar";
  else
    j["target"] = {{"ellr", p.target_r()}};
  json terms = json::array();
  for (std::size_t c = 1; c <= p.components(); ++c) {
    for (const auto& [alpha, coeff] : p.terms(c)) {
      terms.push_back({{"component", c}, {"alpha", alpha}, {"coeff", coeff}});
    }
  }
  j["terms"] = std::move(terms);
  return j;
}

inline HomogeneousPolynomial polynomial_from_json(const json& j) {
  std::size_t N = j.at("N").get<std::size_t>();
  std::size_t n = j.at("n").get<std::size_t>();
  HomogeneousPolynomial p =
      j.at("target").is_string()
          ? HomogeneousPolynomial::scalar(N, n)
          : HomogeneousPolynomial::diagonal(N, n, j.at("target").at("ellr").get<double>());
  for (const json& t : j.at("terms")) {
    p.add_term(t.at("component").get<std::size_t>(),
               t.at("alpha").get<std::vector<unsigned>>(), t.at("coeff").get<double>());
  }
  return p;
}

// ------------------------------------------------------------ norm search

inline json to_json(const SearchResult& r) {
  json j;
  j["value"] = r.value;
  j["point"] = to_json(r.point);
  j["starts"] = r.starts;
  j["attained"] = r.attained;
  j["certificate"] = r.certificate ? to_json(*r.certificate) : json(nullptr);
  json traces = json::array();
  for (const StartTrace& t : r.traces)
    traces.push_back(
        {{"value", t.value}, {"iterations", t.iterations}, {"converged", t.converged}});
  j["traces"] = std::move(traces);
  return j;
}

inline SearchResult search_from_json(const json& j) {
  SearchResult r;
  r.value = j.at("value").get<double>();
  r.point = vector_from_json(j.at("point"));
  r.starts = j.at("starts").get<std::size_t>();
  r.attained = j.at("attained").get<bool>();
  if (!j.at("certificate").is_null())
    r.certificate = certificate_from_json(j.at("certificate"));
  for (const json& t : j.at("traces")) {
    StartTrace s;
    s.value = t.at("value").get<double>();
    s.iterations = t.at("iterations").get<std::size_t>();
    s.converged = t.at("converged").get<bool>();
    r.traces.push_back(s);
  }
  return r;
}

inline json to_json(const BruteForceBracket& b) {
  return json{{"lower", b.lower}, {"upper", b.upper}, {"at", to_json(b.at)}};
}

inline BruteForceBracket brute_bracket_from_json(const json& j) {
  BruteForceBracket b;
  b.lower = j.at("lower").get<double>();
  b.upper = j.at("upper").get<double>();
  b.at = vector_from_json(j.at("at"));
  return b;
}

// ---------------------------------------------------------------- tensors

inline json to_json(const SymmetricTensorRep& u) {
  json j;
  j["degree"] = u.degree();
  j["dim"] = u.dim();
  json terms = json::array();
  for (const TensorTerm& t : u.terms()) {
    json jt;
    jt["lambda"] = t.lambda;
    jt["x"] = to_json(t.x);
    if (t.y) jt["y"] = to_json(*t.y);
    terms.push_back(std::move(jt));
  }
  j["terms"] = std::move(terms);
  return j;
}

inline SymmetricTensorRep tensor_from_json(const json& j) {
  std::vector<TensorTerm> terms;
  for (const json& t : j.at("terms")) {
    TensorTerm term;
    term.lambda = t.at("lambda").get<double>();
    term.x = vector_from_json(t.at("x"));
    if (t.contains("y")) term.y = vector_from_json(t.at("y"));
    terms.push_back(std::move(term));
  }
  return SymmetricTensorRep(j.at("degree").get<std::size_t>(), j.at("dim").get<std::size_t>(),
                            std::move(terms));
}

inline json to_json(const DiscreteMeasure& mu) {
  json atoms = json::array();
  for (const MeasureAtom& a : mu.atoms) {
    json ja;
    ja["weight"] = a.weight;
    ja["xhat"] = to_json(a.xhat);
    if (a.yhat) ja["yhat"] = to_json(*a.yhat);
    atoms.push_back(std::move(ja));
  }
  return json{{"atoms", std::move(atoms)}, {"total_variation", mu.total_variation()}};
}

inline DiscreteMeasure measure_from_json(const json& j) {
  DiscreteMeasure mu;
  for (const json& a : j.at("atoms")) {
    MeasureAtom atom;
    atom.weight = a.at("weight").get<double>();
    atom.xhat = vector_from_json(a.at("xhat"));
    if (a.contains("yhat")) atom.yhat = vector_from_json(a.at("yhat"));
    mu.atoms.push_back(std::move(atom));
  }
  return mu;
}

inline json to_json(const PisBracket& b) {
  json j;
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["lower_exact"] = b.lower_exact;
  j["witness"] = b.witness ? to_json(*b.witness) : json(nullptr);
  return j;
}

inline PisBracket pis_bracket_from_json(const json& j) {
  PisBracket b;
  b.lower = j.at("lower").get<double>();
  b.upper = j.at("upper").get<double>();
  b.lower_exact = j.at("lower_exact").get<bool>();
  if (!j.at("witness").is_null()) b.witness = polynomial_from_json(j.at("witness"));
  return b;
}

// ---------------------------------------------------------- chain reports

inline json to_json(const ChainReport& rep) {
  json chain = json::array();
  for (const ChainEntry& e : rep.chain) {
    chain.push_back({{"label", e.label},
                     {"paper_anchor", e.paper_anchor},
                     {"lhs", e.lhs},
                     {"rhs", e.rhs},
                     {"slack", e.slack},
                     {"pass", e.pass}});
  }
  json params{{"weight", rep.params.weight},
              {"N", rep.params.N},
              {"M", rep.params.M},
              {"n", rep.params.n},
              {"epsilon", rep.params.epsilon}};
  return json{{"id", rep.id},
              {"params", std::move(params)},
              {"chain", std::move(chain)},
              {"verdict", rep.verdict}};
}

inline ChainReport report_from_json(const json& j) {
  ChainReport rep;
  rep.id = j.at("id").get<std::string>();
  const json& p = j.at("params");
  rep.params.weight = p.at("weight").get<std::string>();
  rep.params.N = p.at("N").get<std::size_t>();
  rep.params.M = p.at("M").get<std::size_t>();
  rep.params.n = p.at("n").get<std::size_t>();
  rep.params.epsilon = p.at("epsilon").get<double>();
  for (const json& je : j.at("chain")) {
    ChainEntry e;
    e.label = je.at("label").get<std::string>();
    e.paper_anchor = je.at("paper_anchor").get<std::string>();
    e.lhs = je.at("lhs").get<double>();
    e.rhs = je.at("rhs").get<double>();
    e.slack = je.at("slack").get<double>();
    e.pass = je.at("pass").get<bool>();
    rep.chain.push_back(std::move(e));
  }
  rep.verdict = j.at("verdict").get<std::string>();
  bool all = true;
  for (const ChainEntry& e : rep.chain) all = all && e.pass;
  bool claims_clean = rep.verdict == "no contradiction at this epsilon";
  if (all != claims_clean)
    throw std::invalid_argument("chain report verdict disagrees with its pass flags");
  return rep;
}

// ------------------------------------------------------------------- CSV

inline std::string csv_escape(const std::string& s) {
  bool needs = s.find_first_of(",\"\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/* One row per inequality, fully denormalized so rows from many reports
 * concatenate into a single table under the shared header. */
inline std::string chain_report_csv(const ChainReport& rep, bool header = true) {
  std::ostringstream os;
  os.precision(17);
  if (header) os << "id,weight,N,M,n,epsilon,label,lhs,rhs,slack,pass,verdict\n";
  for (const ChainEntry& e : rep.chain) {
    os << csv_escape(rep.id) << ',' << csv_escape(rep.params.weight) << ',' << rep.params.N
       << ',' << rep.params.M << ',' << rep.params.n << ',' << rep.params.epsilon << ','
       << csv_escape(e.label) << ',' << e.lhs << ',' << e.rhs << ',' << e.slack << ','
       << (e.pass ? "true" : "false") << ',' << csv_escape(rep.verdict) << '\n';
  }
  return os.str();
}

}  // namespace lorentz
