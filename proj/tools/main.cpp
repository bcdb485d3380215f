#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorentzlab/certificates.hpp"
#include "lorentzlab/experiments.hpp"
#include "lorentzlab/norm_search.hpp"
#include "lorentzlab/numeric.hpp"
#include "lorentzlab/polynomials.hpp"
#include "lorentzlab/sequences.hpp"
#include "lorentzlab/serialize.hpp"
#include "lorentzlab/tensor_duality.hpp"
#include "lorentzlab/weights.hpp"

namespace {

using lorentz::json;
using lorentz::TruncatedVector;
using lorentz::WeightSequence;

std::ostream& out() {
  std::cout.precision(17);
  return std::cout;
}

/* "power:<a>" or "list:v1,v2,...". Power-law weights are materialized to a
 * length that covers the request; list weights are exactly what was given. */
WeightSequence parse_weight(const std::string& spec, std::size_t need) {
  if (spec.rfind("power:", 0) == 0) {
    double a = std::stod(spec.substr(6));
    return WeightSequence::power(a, std::max<std::size_t>(need, 64));
  }
  if (spec.rfind("list:", 0) == 0) {
    std::vector<double> vals;
    std::stringstream ss(spec.substr(5));
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    return WeightSequence::from_list(std::move(vals));
  }
  throw std::invalid_argument("weight spec must be power:<a> or list:v1,v2,...");
}

/* "e<k>" for a basis vector, or a JSON array of coordinates. */
TruncatedVector parse_vector(const std::string& spec) {
  if (spec.size() > 1 && spec[0] == 'e') {
    bool digits = true;
    for (std::size_t i = 1; i < spec.size(); ++i) digits = digits && std::isdigit(spec[i]);
    if (digits) return TruncatedVector::basis(std::stoul(spec.substr(1)));
  }
  json j = json::parse(spec, nullptr, false);
  if (j.is_discarded() || !j.is_array())
    throw std::invalid_argument("vector spec must be e<k> or a JSON array like [1,0.5]");
  return TruncatedVector(j.get<std::vector<double>>());
}

double ell_r_norm(const TruncatedVector& x, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("ell_r needs r >= 1");
  lorentz::KahanSum acc;
  for (std::size_t i = 1; i <= x.materialized(); ++i)
    acc.add(std::pow(std::fabs(x.at(i)), r));
  if (x.tail() && x.tail()->c != 0.0) {
    double tr = std::pow(x.tail()->t, r);
    acc.add(std::pow(std::fabs(x.tail()->c), r) * tr / (1.0 - tr));
  }
  return std::pow(acc.value(), 1.0 / r);
}

/* Writes an artifact, re-reads it, and re-validates through the typed
 * parser; a written file that does not round-trip is an internal breach. */
void write_artifact(const std::string& path, const json& j,
                    const std::function<void(const json&)>& revalidate) {
  {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open output file: " + path);
    f << j.dump(2) << '\n';
  }
  std::ifstream f(path);
  json back = json::parse(f);
  if (back != j) throw std::logic_error("artifact did not round-trip: " + path);
  revalidate(back);
}

std::string fmt_vec(const TruncatedVector& x) { return json(x.coords()).dump(); }

void print_report(const lorentz::ChainReport& rep) {
  out() << rep.id << "  w=" << rep.params.weight << " N=" << rep.params.N
        << " M=" << rep.params.M << " n=" << rep.params.n << " eps=" << rep.params.epsilon
        << "\n";
  for (const lorentz::ChainEntry& e : rep.chain) {
    out() << (e.pass ? "  pass  " : "  FAIL  ") << e.label << "  lhs=" << e.lhs
          << "  rhs=" << e.rhs << "  slack=" << e.slack << "\n";
  }
  out() << "verdict: " << rep.verdict << "\n";
}

void maybe_write_report(const std::string& path, const lorentz::ChainReport& rep) {
  if (path.empty()) return;
  write_artifact(path, lorentz::to_json(rep), [](const json& j) { lorentz::report_from_json(j); });
}

lorentz::SymmetricTensorRep load_tensor(const std::string& tensor_path,
                                        const std::string& elementary, std::size_t degree,
                                        std::size_t dim) {
  if (!tensor_path.empty()) {
    std::ifstream f(tensor_path);
    if (!f) throw std::invalid_argument("cannot open tensor file: " + tensor_path);
    return lorentz::tensor_from_json(json::parse(f));
  }
  if (elementary.empty())
    throw std::invalid_argument("provide --tensor <file> or --elementary <vector>");
  if (degree == 0 || dim == 0)
    throw std::invalid_argument("--elementary needs --degree and --dim");
  lorentz::TensorTerm t;
  t.lambda = 1.0;
  t.x = parse_vector(elementary);
  return lorentz::SymmetricTensorRep(degree, dim, {t});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for Lorentz sequence-space norms"};
  app.require_subcommand(1);
  std::function<int()> job;

  // ---- norm ----------------------------------------------------------
  auto* norm = app.add_subcommand("norm", "evaluate a sequence norm");
  {
    static std::string wspec, xspec, space = "dstar";
    static double s = 1.0, r = 2.0;
    norm->add_option("--w", wspec, "weight spec power:<a> or list:...")->required();
    norm->add_option("--x", xspec, "vector spec e<k> or [c1,c2,...]")->required();
    norm->add_option("--space", space)->check(CLI::IsMember({"dstar", "dws", "ellr"}));
    norm->add_option("--s", s, "exponent for the dws norm");
    norm->add_option("--r", r, "exponent for the ellr norm");
    norm->callback([&]() {
      job = []() {
        TruncatedVector x = parse_vector(xspec);
        WeightSequence w = parse_weight(wspec, x.materialized() + 64);
        double v = space == "dstar"  ? lorentz::norm_W(x, w)
                   : space == "dws" ? lorentz::norm_dws(x, w, s)
                                    : ell_r_norm(x, r);
        out() << v << "\n";
        return 0;
      };
    });
  }

  // ---- dualcheck ------------------------------------------------------
  auto* dual = app.add_subcommand("dualcheck", "cross-check norm_W against the extreme-point oracle");
  {
    static std::string wspec, xspec;
    dual->add_option("--w", wspec)->required();
    dual->add_option("--x", xspec)->required();
    dual->callback([&]() {
      job = []() {
        TruncatedVector x = parse_vector(xspec);
        WeightSequence w = parse_weight(wspec, x.materialized() + 64);
        double direct = lorentz::norm_W(x, w);
        lorentz::DualOracleResult oracle = lorentz::dual_norm_oracle(x, w);
        out() << "norm_W: " << direct << "\n";
        out() << "oracle: " << oracle.value << " at k=" << oracle.k << "\n";
        if (std::fabs(direct - oracle.value) > 1e-12 * (1.0 + std::fabs(direct))) {
          out() << "agreement: FAIL\n";
          return 2;
        }
        out() << "agreement: pass\n";
        return 0;
      };
    });
  }

  // ---- certify --------------------------------------------------------
  auto* certify = app.add_subcommand("certify", "extremal-perturbation certificate for a point");
  {
    static std::string wspec, xspec, jpath;
    static std::size_t grid = 33, horizon = 0;
    certify->add_option("--w", wspec)->required();
    certify->add_option("--x", xspec)->required();
    certify->add_option("--grid", grid, "lambda samples for verification");
    certify->add_option("--horizon", horizon, "verification horizon (0 = 10*n0)");
    certify->add_option("--json", jpath, "write the certificate artifact");
    certify->callback([&]() {
      job = []() {
        TruncatedVector x = parse_vector(xspec);
        WeightSequence w = parse_weight(wspec, x.materialized() + 64);
        lorentz::PerturbationCertificate cert = lorentz::certify_predual_point(x, w);
        std::size_t h = horizon == 0 ? 10 * cert.n0 : horizon;
        lorentz::CertificateCheck chk = lorentz::verify_certificate(cert, grid, h);
        out() << "{n0: " << cert.n0 << ", delta: " << cert.delta << "}\n";
        out() << "verification: " << (chk.pass ? "pass" : "FAIL") << "\n";
        if (!jpath.empty())
          write_artifact(jpath, lorentz::to_json(cert),
                         [](const json& j) { lorentz::certificate_from_json(j); });
        return chk.pass ? 0 : 2;
      };
    });
  }

  // ---- polynorm -------------------------------------------------------
  auto* polynorm = app.add_subcommand("polynorm", "maximize a polynomial norm over the unit ball");
  {
    static std::string gal, wspec, jpath;
    static std::size_t N = 2, n = 2, starts = 0, brute = 0;
    static std::optional<std::size_t> M;
    static std::uint64_t seed = 0;
    polynorm->add_option("--gallery", gal, "diag-N | real-BP | lb-complex | lb-real")->required();
    polynorm->add_option("--N", N, "degree")->required();
    polynorm->add_option("--M", M, "diagonal target exponent (omit for scalar)");
    polynorm->add_option("--n", n, "dimension")->required();
    polynorm->add_option("--w", wspec)->required();
    polynorm->add_option("--seed", seed)->required();
    polynorm->add_option("--starts", starts, "ascent starts (0 = library default)");
    polynorm->add_option("--brute", brute, "also run the dense bracket at this resolution");
    polynorm->add_option("--json", jpath, "write the search artifact");
    polynorm->callback([&]() {
      job = []() {
        WeightSequence w = parse_weight(wspec, 10 * n + 64);
        lorentz::HomogeneousPolynomial p = lorentz::gallery(gal, w, N, M, n);
        lorentz::SearchResult res = lorentz::max_norm(p, w, starts, seed);
        out() << "value: " << res.value << "\n";
        out() << "point: " << fmt_vec(res.point) << "\n";
        out() << "attained: " << (res.attained ? "yes" : "no") << "\n";
        if (res.certificate) {
          out() << "certificate: {n0: " << res.certificate->n0
                << ", delta: " << res.certificate->delta << "}\n";
        }
        if (brute >= 5) {
          lorentz::BruteForceBracket b = lorentz::brute_force_norm(p, w, brute);
          out() << "brute bracket: [" << b.lower << ", " << b.upper << "]\n";
          if (res.value < b.lower - 1e-9 || res.value > b.upper + 1e-9) {
            out() << "bracket check: FAIL\n";
            return 2;
          }
          out() << "bracket check: pass\n";
        }
        if (!jpath.empty())
          write_artifact(jpath, lorentz::to_json(res),
                         [](const json& j) { lorentz::search_from_json(j); });
        return 0;
      };
    });
  }

  // ---- pis ------------------------------------------------------------
  auto* pis = app.add_subcommand("pis", "symmetric projective tensor-norm bracket");
  {
    static std::string wspec, tensor_path, elementary, jpath;
    static std::size_t degree = 0, dim = 0, restarts = 8, family = 16;
    static std::uint64_t seed = 0;
    pis->add_option("--w", wspec)->required();
    pis->add_option("--tensor", tensor_path, "JSON tensor representation file");
    pis->add_option("--elementary", elementary, "single-term tensor from this vector");
    pis->add_option("--degree", degree);
    pis->add_option("--dim", dim);
    pis->add_option("--restarts", restarts);
    pis->add_option("--family", family);
    pis->add_option("--seed", seed)->required();
    pis->add_option("--json", jpath, "write the bracket artifact");
    pis->callback([&]() {
      job = []() {
        lorentz::SymmetricTensorRep u = load_tensor(tensor_path, elementary, degree, dim);
        WeightSequence w = parse_weight(wspec, u.dim() + 64);
        lorentz::PisBracket b = lorentz::pis_bracket(u, w, restarts, family, seed);
        out() << "lower: " << b.lower << (b.lower_exact ? " (exact)" : " (search)") << "\n";
        out() << "upper: " << b.upper << "\n";
        bool collapsed = b.upper - b.lower <= 1e-9 * (1.0 + std::fabs(b.upper));
        out() << "collapsed: " << (collapsed ? "yes" : "no") << "\n";
        if (b.lower > b.upper + 1e-12 * (1.0 + std::fabs(b.upper))) {
          out() << "bracket order: FAIL\n";
          return 2;
        }
        if (!jpath.empty())
          write_artifact(jpath, lorentz::to_json(b),
                         [](const json& j) { lorentz::pis_bracket_from_json(j); });
        return 0;
      };
    });
  }

  // ---- measure --------------------------------------------------------
  auto* measure = app.add_subcommand("measure", "discrete representing measure with fidelity check");
  {
    static std::string wspec, tensor_path, elementary, jpath;
    static std::size_t degree = 0, dim = 0;
    measure->add_option("--w", wspec)->required();
    measure->add_option("--tensor", tensor_path);
    measure->add_option("--elementary", elementary);
    measure->add_option("--degree", degree);
    measure->add_option("--dim", dim);
    measure->add_option("--json", jpath, "write the measure artifact");
    measure->callback([&]() {
      job = []() {
        lorentz::SymmetricTensorRep u = load_tensor(tensor_path, elementary, degree, dim);
        WeightSequence w = parse_weight(wspec, u.dim() + 64);
        lorentz::DiscreteMeasure mu = lorentz::representing_measure(u, w);
        for (const lorentz::MeasureAtom& a : mu.atoms) {
          out() << "atom: weight=" << a.weight << " xhat=" << fmt_vec(a.xhat);
          if (a.yhat) out() << " yhat=" << fmt_vec(*a.yhat);
          out() << "\n";
        }
        out() << "total_variation: " << mu.total_variation() << "\n";
        if (mu.total_variation() != lorentz::representation_value(u, w)) {
          out() << "mass identity: FAIL\n";
          return 2;
        }
        lorentz::HomogeneousPolynomial probe =
            u.vector_valued()
                ? lorentz::gallery("diag-N", w, u.degree(), std::size_t{2}, u.dim())
                : lorentz::gallery("diag-N", w, u.degree(), std::nullopt, u.dim());
        double lhs = lorentz::pair(u, probe);
        double rhs = lorentz::pair(mu, probe);
        bool ok = std::fabs(lhs - rhs) <= 1e-12 * (1.0 + std::fabs(lhs));
        out() << "fidelity: " << (ok ? "pass" : "FAIL") << "\n";
        if (!jpath.empty())
          write_artifact(jpath, lorentz::to_json(mu),
                         [](const json& j) { lorentz::measure_from_json(j); });
        return ok ? 0 : 2;
      };
    });
  }

  // ---- experiment -----------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "replay a counterexample inequality chain");
  experiment->require_subcommand(1);
  {
    auto* bp = experiment->add_subcommand("bp", "diagonal-composite chain");
    static std::string bw, bjson, bcsv;
    static std::size_t bN = 2, bn = 4;
    static double beps = 1e-3;
    static std::uint64_t bseed = 0;
    bp->add_option("--w", bw)->required();
    bp->add_option("--N", bN)->required();
    bp->add_option("--n", bn)->required();
    bp->add_option("--eps", beps)->required();
    bp->add_option("--seed", bseed)->required();
    bp->add_option("--json", bjson, "write the report artifact");
    bp->add_option("--csv", bcsv, "write the flattened table");
    bp->callback([&]() {
      job = []() {
        WeightSequence w = parse_weight(bw, 10 * bn + 64);
        std::optional<unsigned> M = lorentz::smallest_ellr_index(w);
        if (!M) throw std::invalid_argument("weights admit no finite power-summability index");
        lorentz::HomogeneousPolynomial Q = lorentz::gallery("real-BP", w, bN, *M, bn);
        lorentz::SearchResult res = lorentz::max_norm(Q, w, 32, bseed);
        if (!res.certificate)
          throw std::invalid_argument("could not certify the attainment point");
        lorentz::ChainReport rep =
            lorentz::bp_chain(w, bN, Q, res.point, *res.certificate, beps, bseed);
        print_report(rep);
        const lorentz::ChainEntry* collapse = nullptr;
        for (const lorentz::ChainEntry& e : rep.chain)
          if (e.label == "norm-collapse-bound") collapse = &e;
        if (collapse)
          out() << "headline: |Q|^M = " << collapse->lhs << " vs implied bound "
                << collapse->rhs << "\n";
        maybe_write_report(bjson, rep);
        if (!bcsv.empty()) {
          std::ofstream f(bcsv);
          if (!f) throw std::invalid_argument("cannot open output file: " + bcsv);
          f << lorentz::chain_report_csv(rep);
        }
        return 0;
      };
    });

    auto* lb = experiment->add_subcommand("lb", "perturbed-optimization chain");
    static std::string lw, lvariant = "poly", ljson, lcsv;
    static std::size_t lN = 3, lM = 2, ln = 4;
    static double leps = 0.01;
    static std::uint64_t lseed = 0;
    lb->add_option("--w", lw)->required();
    lb->add_option("--variant", lvariant)->check(CLI::IsMember({"poly", "multi"}));
    lb->add_option("--N", lN)->required();
    lb->add_option("--M", lM, "needed for the poly variant");
    lb->add_option("--n", ln)->required();
    lb->add_option("--eps", leps)->required();
    lb->add_option("--seed", lseed)->required();
    lb->add_option("--json", ljson, "write the report artifact");
    lb->add_option("--csv", lcsv, "write the flattened table");
    lb->callback([&]() {
      job = []() {
        WeightSequence w = parse_weight(lw, 10 * ln + 64);
        lorentz::ChainReport rep = [&]() {
          if (lvariant == "multi") return lorentz::lb_chain_multilinear(w, lN, ln, leps);
          lorentz::HomogeneousPolynomial q = lorentz::gallery("lb-real", w, lN, lM, ln);
          lorentz::SearchResult res = lorentz::max_norm(q, w, 32, lseed);
          return lorentz::lb_chain_polynomial(w, lN, lM, q, res.point, leps, lseed);
        }();
        print_report(rep);
        maybe_write_report(ljson, rep);
        if (!lcsv.empty()) {
          std::ofstream f(lcsv);
          if (!f) throw std::invalid_argument("cannot open output file: " + lcsv);
          f << lorentz::chain_report_csv(rep);
        }
        return 0;
      };
    });
  }

  // ---- report ---------------------------------------------------------
  auto* report = app.add_subcommand("report", "aggregate chain-report JSON files into one CSV");
  {
    static std::vector<std::string> inputs;
    static std::string csv_out;
    report->add_option("inputs", inputs, "chain report JSON files")->required();
    report->add_option("--out", csv_out, "CSV output path (default stdout)");
    report->callback([&]() {
      job = []() {
        std::ostringstream acc;
        bool first = true;
        for (const std::string& path : inputs) {
          std::ifstream f(path);
          if (!f) throw std::invalid_argument("cannot open report file: " + path);
          lorentz::ChainReport rep = lorentz::report_from_json(json::parse(f));
          acc << lorentz::chain_report_csv(rep, first);
          first = false;
        }
        if (csv_out.empty()) {
          out() << acc.str();
        } else {
          std::ofstream f(csv_out);
          if (!f) throw std::invalid_argument("cannot open output file: " + csv_out);
          f << acc.str();
        }
        return 0;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return job ? job() : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal invariant breach: " << e.what() << "\n";
    return 2;
  }
}
