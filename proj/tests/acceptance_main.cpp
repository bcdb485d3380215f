/* Acceptance gate: one line per criterion, zero exit only if all pass.
 * Tolerances and budgets are pinned here and nowhere else. */

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
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

using lorentz::HomogeneousPolynomial;
using lorentz::TruncatedVector;
using lorentz::WeightSequence;

namespace {

constexpr double kDualityRel = 1e-12;        // criterion 1
constexpr double kPolarizationTol = 1e-10;   // criterion 4
constexpr double kPsiExactTol = 1e-12;       // criterion 4, worked fraction
constexpr double kSearchBracketRel = 1e-6;   // criterion 5
constexpr double kMeasureFidelity = 1e-12;   // criterion 7
constexpr double kCollapseTol = 1e-9;        // criterion 9
constexpr double kBudget1 = 10.0, kBudget3 = 30.0, kBudget5 = 120.0;  // seconds

struct Outcome {
  bool pass = false;
  std::string note;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

TruncatedVector random_finite(std::mt19937_64& rng, std::size_t maxdim, bool allow_zero = false) {
  std::size_t n = 1 + rng() % maxdim;
  std::vector<double> c(n);
  bool nonzero = false;
  for (double& v : c) {
    v = uniform(rng, -2.0, 2.0);
    if (rng() % 4 == 0) v = 0.0;
    nonzero = nonzero || v != 0.0;
  }
  if (!nonzero && !allow_zero) c[0] = 1.0;
  return TruncatedVector(std::move(c));
}

// ---- 1: duality oracle ---------------------------------------------------

Outcome criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::size_t checked = 0;
  for (double a : {1.0, 0.5}) {
    WeightSequence w = WeightSequence::power(a, 64);
    for (int trial = 0; trial < 1000; ++trial) {
      TruncatedVector x = random_finite(rng, 12);
      double direct = lorentz::norm_W(x, w);
      double oracle = lorentz::dual_norm_oracle(x, w).value;
      if (std::fabs(direct - oracle) > kDualityRel * std::max(1.0, std::fabs(direct)))
        return {false, "mismatch " + std::to_string(direct) + " vs " + std::to_string(oracle)};
      ++checked;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= kBudget1) return {false, "budget exceeded"};
  return {true, std::to_string(checked) + " vectors, " + std::to_string(secs) + " s"};
}

// ---- 2: basis normalization ---------------------------------------------

Outcome criterion2() {
  for (double a : {1.0, 0.5}) {
    WeightSequence w = WeightSequence::power(a, 64);
    for (std::size_t i = 1; i <= 50; ++i) {
      TruncatedVector ei = TruncatedVector::basis(i);
      if (lorentz::norm_W(ei, w) != 1.0) return {false, "norm_W(e_i) != 1"};
      if (lorentz::norm_dws(ei, w, 1.0) != 1.0) return {false, "norm_dws(e_i,1) != 1"};
      if (lorentz::norm_dws(ei, w, 2.0) != 1.0) return {false, "norm_dws(e_i,2) != 1"};
    }
  }
  return {true, "100 basis vectors x 3 norms, exact"};
}

// ---- 3: certificate soundness --------------------------------------------

Outcome criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(303);
  WeightSequence w = WeightSequence::power(1.0, 128);
  std::size_t checked = 0;

  auto scaled_into_ball = [&](TruncatedVector v) {
    double nv = lorentz::norm_W(v, w);
    return v.scaled(uniform(rng, 0.2, 0.9) / nv);
  };

  for (int trial = 0; trial < 100; ++trial) {
    TruncatedVector x = random_finite(rng, 10);
    if (trial % 2 == 1) {
      std::vector<double> c = x.coords();
      x = TruncatedVector(std::move(c), lorentz::GeometricTail{uniform(rng, 0.05, 0.5),
                                                               uniform(rng, 0.05, 0.45)});
    }
    x = scaled_into_ball(std::move(x));
    lorentz::PerturbationCertificate cert = lorentz::certify_predual_point(x, w);
    if (!lorentz::verify_certificate(cert, 1001, 10 * cert.n0).pass)
      return {false, "certify_predual_point output failed verification"};
    ++checked;
  }

  for (int trial = 0; trial < 100; ++trial) {
    TruncatedVector base = scaled_into_ball(random_finite(rng, 8));
    TruncatedVector z = base;
    if (trial % 2 == 1) {
      std::vector<double> c = base.coords();
      z = TruncatedVector(std::move(c),
                          lorentz::GeometricTail{uniform(rng, 0.01, 0.1), uniform(rng, 0.05, 0.4)});
    } else {
      z = lorentz::add_basis_multiple(base, base.materialized() + 1, uniform(rng, -0.05, 0.05));
    }
    lorentz::PerturbationCertificate cert = lorentz::lemma2_certify(z, base, w);
    if (!lorentz::verify_certificate(cert, 1001, 10 * cert.n0).pass)
      return {false, "lemma2_certify output failed verification"};
    ++checked;
  }

  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= kBudget3) return {false, "budget exceeded"};
  return {true, std::to_string(checked) + " certificates, grid 1001, " + std::to_string(secs) +
                    " s"};
}

// ---- 4: polarization identities -------------------------------------------

HomogeneousPolynomial random_scalar_poly(std::mt19937_64& rng, std::size_t dim,
                                         std::size_t degree) {
  HomogeneousPolynomial p = HomogeneousPolynomial::scalar(degree, dim);
  std::size_t terms = 1 + rng() % 5;
  for (std::size_t t = 0; t < terms; ++t) {
    std::vector<unsigned> alpha(dim, 0);
    for (std::size_t d = 0; d < degree; ++d) alpha[rng() % dim] += 1;
    p.add_term(1, std::move(alpha), uniform(rng, -2.0, 2.0));
  }
  return p;
}

Outcome criterion4() {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t dim = 1 + rng() % 4;
    std::size_t degree = 1 + rng() % 4;
    HomogeneousPolynomial p = random_scalar_poly(rng, dim, degree);
    std::size_t m = 1 + rng() % dim;
    std::vector<double> c(m);
    for (double& v : c) v = uniform(rng, -1.5, 1.5);
    TruncatedVector x(std::move(c));
    std::vector<TruncatedVector> args(degree, x);
    double lhs = lorentz::polarize_scalar(p, args);
    double rhs = p.evaluate_scalar(x);
    if (std::fabs(lhs - rhs) > kPolarizationTol * std::max(1.0, std::fabs(rhs)))
      return {false, "diagonal polarization mismatch"};
  }

  WeightSequence w = WeightSequence::power(1.0, 16);
  HomogeneousPolynomial Q = lorentz::gallery("real-BP", w, 2, 2, 4);
  HomogeneousPolynomial qQ = lorentz::diagonal_compose({1.0, 1.0, 1.0, 1.0}, 2, Q);
  for (std::size_t n : {3, 4}) {
    std::vector<TruncatedVector> args = {TruncatedVector::basis(1), TruncatedVector::basis(1),
                                         TruncatedVector::basis(n), TruncatedVector::basis(n)};
    double psi = lorentz::polarize_scalar(qQ, args);
    if (std::fabs(psi - 1.0 / 6.0) > kPsiExactTol) return {false, "psi(e1,e1,en,en) != 1/6"};
  }
  return {true, "500 diagonal identities + psi = 1/6"};
}

// ---- 5: norm search vs dense bracket --------------------------------------

Outcome criterion5() {
  auto t0 = std::chrono::steady_clock::now();
  WeightSequence w = WeightSequence::power(1.0, 64);
  std::size_t tested = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t res = n <= 2 ? 33 : (n == 3 ? 25 : 17);
    for (std::size_t N = 1; N <= 3; ++N) {
      struct Combo {
        const char* name;
        std::optional<std::size_t> M;
      };
      for (const Combo& cb : {Combo{"diag-N", std::nullopt}, Combo{"diag-N", 2},
                              Combo{"real-BP", 2}, Combo{"lb-complex", std::nullopt},
                              Combo{"lb-real", 2}}) {
        HomogeneousPolynomial p = [&]() -> HomogeneousPolynomial {
          try {
            return lorentz::gallery(cb.name, w, N, cb.M, n);
          } catch (const std::invalid_argument&) {
            return HomogeneousPolynomial::scalar(1, 1);  // sentinel: combo not defined
          }
        }();
        if (p.dim() != n || p.degree() != N) continue;
        lorentz::SearchResult sr = lorentz::max_norm(p, w, 0, 9);
        lorentz::BruteForceBracket br = lorentz::brute_force_norm(p, w, res);
        double tol = kSearchBracketRel * std::max(1.0, sr.value);
        if (sr.value < br.lower - tol || sr.value > br.upper + tol)
          return {false, std::string(cb.name) + " left the bracket at n=" + std::to_string(n) +
                             " N=" + std::to_string(N)};
        ++tested;
      }
    }
  }
  if (tested < 30) return {false, "gallery sweep unexpectedly small"};

  WeightSequence w2 = WeightSequence::from_list({1.0, 0.5});
  HomogeneousPolynomial ss = lorentz::gallery("diag-N", w2, 2, std::nullopt, 2);
  double v = lorentz::max_norm(ss, w2, 0, 9).value;
  if (std::fabs(v - 1.25) > 1e-9) return {false, "worked value 1.25 not reproduced"};

  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= kBudget5) return {false, "budget exceeded"};
  return {true, std::to_string(tested) + " gallery polynomials + worked 1.25, " +
                    std::to_string(secs) + " s"};
}

// ---- 6: local-max diagnostic ----------------------------------------------

Outcome criterion6() {
  WeightSequence w = WeightSequence::power(1.0, 64);
  std::size_t passed = 0;
  for (std::size_t n = 2; n <= 4; ++n) {
    for (std::size_t N = 2; N <= 3; ++N) {
      for (const char* name : {"diag-N", "real-BP"}) {
        HomogeneousPolynomial p = lorentz::gallery(name, w, N, 2, n);
        lorentz::SearchResult sr = lorentz::max_norm(p, w, 0, 6);
        if (!sr.certificate) return {false, "search maximizer had no certificate"};
        lorentz::LocalMaxReport rep = lorentz::local_max_diagnostic(
            p, sr.point, *sr.certificate, std::max(sr.certificate->n0, n));
        if (!rep.pass)
          return {false, std::string(name) + " diagnostic failed at its own maximizer"};
        ++passed;
      }
    }
  }

  // The diagonal power map violates the lemma's conclusion at a certified
  // non-maximizing extreme point: the basis image does not vanish.
  HomogeneousPolynomial Q = lorentz::gallery("diag-N", w, 2, 2, 2);
  lorentz::PerturbationCertificate cert =
      lorentz::certify_predual_point(TruncatedVector::basis(1), w);
  lorentz::LocalMaxReport rep =
      lorentz::local_max_diagnostic(Q, TruncatedVector::basis(1), cert, 2);
  if (rep.pass) return {false, "gallery violation was not flagged"};
  if (!(rep.gstar > rep.g0 + 1e-12)) return {false, "expected g(lambda) > g(0) off the origin"};
  if (rep.basis_image_ok || !rep.basis_image.has_value() || *rep.basis_image != 1.0)
    return {false, "expected unit basis image at the violation"};
  return {true, std::to_string(passed) + " certified maximizers pass; violation flagged"};
}

// ---- 7: representing measures ---------------------------------------------

Outcome criterion7() {
  std::mt19937_64 rng(707);
  WeightSequence w = WeightSequence::power(1.0, 32);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t dim = 1 + rng() % 4;
    std::size_t degree = 1 + rng() % 3;
    bool vector_valued = rng() % 2 == 0;
    std::size_t nterms = 1 + rng() % 4;
    std::vector<lorentz::TensorTerm> terms;
    for (std::size_t t = 0; t < nterms; ++t) {
      lorentz::TensorTerm term;
      term.lambda = uniform(rng, -2.0, 2.0);
      term.x = random_finite(rng, dim);
      if (vector_valued) term.y = random_finite(rng, dim);
      terms.push_back(std::move(term));
    }
    lorentz::SymmetricTensorRep u(degree, dim, std::move(terms));
    lorentz::DiscreteMeasure mu = lorentz::representing_measure(u, w);
    if (mu.total_variation() != lorentz::representation_value(u, w))
      return {false, "total variation != representation value"};

    for (int probe = 0; probe < 50; ++probe) {
      HomogeneousPolynomial p = [&]() {
        if (!vector_valued) return random_scalar_poly(rng, dim, degree);
        HomogeneousPolynomial q = HomogeneousPolynomial::diagonal(degree, dim, 2.0);
        for (std::size_t comp = 1; comp <= dim; ++comp) {
          std::vector<unsigned> alpha(dim, 0);
          for (std::size_t d = 0; d < degree; ++d) alpha[rng() % dim] += 1;
          q.add_term(comp, std::move(alpha), uniform(rng, -2.0, 2.0));
        }
        return q;
      }();
      double lhs = lorentz::pair(u, p);
      double rhs = lorentz::pair(mu, p);
      if (std::fabs(lhs - rhs) > kMeasureFidelity * (1.0 + std::fabs(lhs)))
        return {false, "atom-sum pairing mismatch"};
    }
  }
  return {true, "200 tensors x 50 probes, TV exact"};
}

// ---- 8: chain reproduction -------------------------------------------------

Outcome criterion8() {
  WeightSequence w = WeightSequence::power(1.0, 64);

  HomogeneousPolynomial q = lorentz::gallery("lb-real", w, 3, 2, 4);
  for (std::size_t n : {2, 3, 4}) {
    std::vector<TruncatedVector> args = {TruncatedVector::basis(1), TruncatedVector::basis(n),
                                         TruncatedVector::basis(n)};
    double v = lorentz::binomial(3, 2) * lorentz::polarize_scalar(q, args);
    double target = (n % 2 == 1 ? -1.0 : 1.0);
    if (v != target) return {false, "sign alternation not exact at n=" + std::to_string(n)};
  }

  HomogeneousPolynomial Q = lorentz::gallery("real-BP", w, 2, 2, 4);
  lorentz::SearchResult res = lorentz::max_norm(Q, w, 32, 5);
  if (!res.certificate) return {false, "no certificate for the bp attainment point"};
  lorentz::ChainReport bp1 = lorentz::bp_chain(w, 2, Q, res.point, *res.certificate, 1e-3, 5);
  lorentz::ChainReport bp2 = lorentz::bp_chain(w, 2, Q, res.point, *res.certificate, 1e-3, 5);
  if (lorentz::to_json(bp1).dump() != lorentz::to_json(bp2).dump())
    return {false, "bp_chain is not deterministic"};
  bool ident_ok = false;
  for (const lorentz::ChainEntry& e : bp1.chain)
    if (e.label == "mixed-form-identity") ident_ok = e.pass;
  if (!ident_ok) return {false, "bp mixed-form identity entry failed"};

  lorentz::SearchResult lbres = lorentz::max_norm(q, w, 32, 7);
  lorentz::ChainReport lb1 = lorentz::lb_chain_polynomial(w, 3, 2, q, lbres.point, 0.01, 7);
  lorentz::ChainReport lb2 = lorentz::lb_chain_polynomial(w, 3, 2, q, lbres.point, 0.01, 7);
  if (lorentz::to_json(lb1).dump() != lorentz::to_json(lb2).dump())
    return {false, "lb_chain is not deterministic"};
  for (const lorentz::ChainEntry& e : lb1.chain)
    if (e.label == "sign-alternation-identity" && !e.pass)
      return {false, "lb alternation identity entry failed"};

  lorentz::ChainReport mu1 = lorentz::lb_chain_multilinear(w, 2, 6, 0.5);
  lorentz::ChainReport mu2 = lorentz::lb_chain_multilinear(w, 2, 6, 0.5);
  if (lorentz::to_json(mu1).dump() != lorentz::to_json(mu2).dump())
    return {false, "multilinear chain is not deterministic"};
  for (const lorentz::ChainEntry& e : mu1.chain)
    if (e.label == "approximant-gap" && !(e.pass && e.lhs >= 1.0))
      return {false, "multilinear gap below 1"};
  return {true, "alternation exact, gap >= 1, reports deterministic"};
}

// ---- 9: elementary tensor collapse ----------------------------------------

Outcome criterion9() {
  std::mt19937_64 rng(909);
  WeightSequence w = WeightSequence::power(1.0, 32);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t dim = 1 + rng() % 6;
    std::size_t degree = 1 + rng() % 4;
    TruncatedVector x = random_finite(rng, dim);
    lorentz::TensorTerm t;
    t.lambda = 1.0;
    t.x = x;
    lorentz::SymmetricTensorRep u(degree, std::max(dim, x.materialized()), {t});
    lorentz::PisBracket b = lorentz::pis_bracket(u, w, 8, 16, 1000 + trial);
    double truth = lorentz::pow_int(lorentz::norm_W(x, w), static_cast<unsigned>(degree));
    double tol = kCollapseTol * std::max(1.0, truth);
    if (std::fabs(b.upper - truth) > tol || std::fabs(b.lower - truth) > tol)
      return {false, "bracket did not collapse to the W-norm power"};
    // The endpoints are independently rounded computations of the same real
    // quantity, so ordering holds only up to relative rounding error.
    if (b.lower > b.upper + 1e-12 * std::max(1.0, truth)) return {false, "inverted bracket"};
  }
  return {true, "100 elementary tensors collapse to ||x||_W^N"};
}

}  // namespace

int main() {
  struct Row {
    int id;
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Row> rows = {
      {1, "duality oracle agreement", criterion1},
      {2, "basis vectors have unit norm", criterion2},
      {3, "certificate soundness under dense verification", criterion3},
      {4, "polarization identities", criterion4},
      {5, "search values inside dense brackets", criterion5},
      {6, "local-max diagnostic shadows and violation", criterion6},
      {7, "representing-measure fidelity", criterion7},
      {8, "counterexample chain reproduction", criterion8},
      {9, "elementary tensor bracket collapse", criterion9},
  };
  int failures = 0;
  for (const Row& r : rows) {
    Outcome o;
    try {
      o = r.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  criterion %d: %s  [%s]\n", o.pass ? "PASS" : "FAIL", r.id, r.label,
                o.note.c_str());
    if (!o.pass) ++failures;
  }
  if (failures == 0) std::printf("acceptance: all %zu criteria pass\n", rows.size());
  return failures;
}
