#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lorentzlab/certificates.hpp"
#include "lorentzlab/norm_search.hpp"
#include "lorentzlab/numeric.hpp"
#include "lorentzlab/polynomials.hpp"
#include "lorentzlab/sequences.hpp"
#include "lorentzlab/weights.hpp"

namespace lorentz {

struct ChainEntry {
  std::string label;
  std::string paper_anchor;  // wire-format key; holds a plain description of the fact checked
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = false;
};

struct ChainParams {
  std::string weight;
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
};

struct ChainReport {
  std::string id;
  ChainParams params;
  std::vector<ChainEntry> chain;
  std::string verdict;
};

namespace detail {

inline std::string weight_label(const WeightSequence& w) {
  if (w.is_power()) {
    std::ostringstream os;
    os << "power:" << w.exponent();
    return os.str();
  }
  return "list[" + std::to_string(w.size()) + "]";
}

inline void finish_verdict(ChainReport& rep) {
  for (const ChainEntry& e : rep.chain) {
    if (!e.pass) {
      rep.verdict = "contradiction reproduced: " + e.label;
      return;
    }
  }
  rep.verdict = "no contradiction at this epsilon";
}

inline ChainEntry make_entry(std::string label, std::string anchor, double lhs, double rhs,
                             bool pass) {
  ChainEntry e;
  e.label = std::move(label);
  e.paper_anchor = std::move(anchor);
  e.lhs = lhs;
  e.rhs = rhs;
  e.slack = rhs - lhs;
  e.pass = pass;
  return e;
}

inline bool same_vector(const TruncatedVector& a, const TruncatedVector& b) {
  std::size_t m = std::max(a.materialized(), b.materialized());
  for (std::size_t i = 1; i <= m; ++i)
    if (a.at(i) != b.at(i)) return false;
  if (a.tail().has_value() != b.tail().has_value()) return false;
  if (a.tail() && (a.tail()->c != b.tail()->c || a.tail()->t != b.tail()->t)) return false;
  return true;
}

/* phi(a,...,a, e_n x M) for the symmetric form of a scalar polynomial,
 * with coordinates past the polynomial's variables handled as the zero
 * direction (the sequence-space cylinder semantics). */
inline double mixed_form_at(const HomogeneousPolynomial& p, const TruncatedVector& a,
                            std::size_t n, std::size_t m_copies) {
  TruncatedVector en = restrict_to(TruncatedVector::basis(n), p.dim());
  std::vector<TruncatedVector> args(p.degree() - m_copies, restrict_to(a, p.dim()));
  args.insert(args.end(), m_copies, en);
  return polarize_scalar(p, args);
}

/* The limsup/liminf statements are asymptotic: at any finite rank the mixed
 * form may oscillate (that oscillation is what the alternation identities
 * record), so their only faithful finite shadow starts past both the
 * certificate rank and the truncation edge. */
inline std::pair<std::size_t, std::size_t> asymptotic_window(std::size_t n0, std::size_t dim) {
  std::size_t lo = std::max(n0, dim + 1);
  return {lo, lo + 2};
}

}  // namespace detail

/* Replays the quantitative chain showing why the diagonal-into-ell_M gallery
 * map admits no nearby norm-attaining approximant in the infinite space:
 * builds the sign polynomial q_{P,a} from P's value pattern at a, composes
 * it with both P and the companion map Q(x) = (x(1)^{N-1} x(i))_i, and
 * evaluates every inequality of the argument at materialized coordinates.
 * Windows ending at the truncation edge are finite surrogates of the
 * asymptotic statements; the verdict names the first broken inequality. */
inline ChainReport bp_chain(const WeightSequence& w, std::size_t N,
                            const HomogeneousPolynomial& P, const TruncatedVector& a,
                            const PerturbationCertificate& cert, double epsilon,
                            std::uint64_t seed = 1) {
  std::optional<unsigned> Mopt = smallest_ellr_index(w);
  if (!Mopt) throw std::invalid_argument("weight sequence has no finite power-summability index");
  const std::size_t M = *Mopt;
  const std::size_t NM = N * M;
  if (N < 2) throw std::invalid_argument("the real-case chain needs degree N >= 2");
  if (NM > kMaxPolarizationDegree)
    throw std::invalid_argument("N*M exceeds the polarization budget");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("epsilon must be a finite nonnegative real");
  if (P.target() != HomogeneousPolynomial::Target::DiagonalEllR ||
      P.degree() != N || P.target_r() != double(M))
    throw std::invalid_argument("candidate P must be an N-homogeneous map into diagonal ell_M");
  const std::size_t dim = P.dim();
  if (dim < 2) throw std::invalid_argument("the chain needs at least two coordinates");
  if (!a.finitely_supported() || a.materialized() > dim)
    throw std::invalid_argument("attainment point must live in the polynomial's variables");
  if (!detail::same_vector(a, cert.subject))
    throw std::invalid_argument("certificate subject differs from the attainment point");
  if (!verify_certificate(cert, 33, std::max(10 * cert.n0, dim)).pass)
    throw std::invalid_argument("invalid certificate");

  ChainReport rep;
  rep.id = "bp-chain";
  rep.params = {detail::weight_label(w), N, M, dim, epsilon};

  HomogeneousPolynomial Q = gallery("real-BP", w, N, M, dim);
  std::vector<double> pa = P.evaluate_components(a);
  std::vector<double> lambda(dim, 1.0);
  for (std::size_t i = 0; i < dim; ++i) lambda[i] = pa[i] >= 0.0 ? 1.0 : -1.0;
  std::vector<double> csigns(dim, 1.0);
  if (M % 2 == 1) csigns = lambda;
  HomogeneousPolynomial qP = diagonal_compose(csigns, M, P);
  HomogeneousPolynomial qQ = diagonal_compose(csigns, M, Q);

  const double equicont_factor = factorial(static_cast<unsigned>(NM)) /
                                 pow_int(double(NM), static_cast<unsigned>(NM));
  double closeness = max_norm(add(qQ, qP.scaled(-1.0)), w, 32, seed).value;
  rep.chain.push_back(detail::make_entry(
      "equicont-closeness",
      "composed sign polynomial stays within epsilon scaled by (NM)!/(NM)^NM",
      closeness, epsilon * equicont_factor, closeness < epsilon * equicont_factor));

  auto [alo, ahi] = detail::asymptotic_window(cert.n0, dim);
  double phi_max = -std::numeric_limits<double>::infinity();
  for (std::size_t n = alo; n <= ahi; ++n)
    phi_max = std::max(phi_max, detail::mixed_form_at(qP, a, n, M));
  rep.chain.push_back(detail::make_entry(
      "limsup-phi-nonpositive",
      "asymptotic surrogate past the truncation edge: mixed form of the attaining composite is "
      "eventually nonpositive",
      phi_max, 0.0, phi_max <= 1e-9));

  const double binom_nm = binomial(static_cast<unsigned>(NM), static_cast<unsigned>(M));
  const double a1pow = pow_int(a.at(1), static_cast<unsigned>(M * (N - 1)));
  double ident_dev = 0.0;
  for (std::size_t n = std::min<std::size_t>(cert.n0, dim); n <= dim; ++n) {
    double lhs = binom_nm * detail::mixed_form_at(qQ, a, n, M);
    double rhs = csigns[n - 1] * a1pow;
    ident_dev = std::max(ident_dev, std::fabs(lhs - rhs));
  }
  rep.chain.push_back(detail::make_entry(
      "mixed-form-identity",
      "scaled mixed form of the companion composite equals the signed first-coordinate power",
      ident_dev, 1e-10, ident_dev <= 1e-10));

  double a1abs = pow_int(std::fabs(a.at(1)), static_cast<unsigned>(M * (N - 1)));
  rep.chain.push_back(detail::make_entry(
      "attainment-coordinate-bound",
      "first coordinate of the attainment point is pinched by binom(NM,M) epsilon",
      a1abs, binom_nm * epsilon, a1abs <= binom_nm * epsilon));

  KahanSum wsum;
  for (std::size_t i = 1; i <= dim; ++i)
    wsum.add(pow_int(w.value(i), static_cast<unsigned>(M)));
  double qnorm = max_norm(Q, w, 32, seed + 1).value;
  double collapse_rhs = epsilon * (binom_nm * wsum.value() + 2.0);
  rep.chain.push_back(detail::make_entry(
      "norm-collapse-bound",
      "companion map norm to the M collapses against the epsilon-weighted constant",
      pow_int(qnorm, static_cast<unsigned>(M)), collapse_rhs,
      pow_int(qnorm, static_cast<unsigned>(M)) <= collapse_rhs));

  double basis_image = Q.output_norm(TruncatedVector::basis(dim));
  rep.chain.push_back(detail::make_entry(
      "unit-basis-image", "late basis vectors must map strictly below epsilon", basis_image,
      epsilon, basis_image < epsilon));

  detail::finish_verdict(rep);
  return rep;
}

/* Polynomial half of the perturbed-optimization chain: a witness close to
 * the maximizer feeds the two-point certificate machinery, and the sign
 * dichotomy plus the alternating mixed-form identity pinch the first
 * coordinate of the attainment point by binom(N,M) epsilon. */
inline ChainReport lb_chain_polynomial(const WeightSequence& w, std::size_t N, std::size_t M,
                                       const HomogeneousPolynomial& q,
                                       const TruncatedVector& witness, double epsilon,
                                       std::uint64_t seed = 1) {
  std::optional<unsigned> Mopt = smallest_ellr_index(w);
  if (!Mopt) throw std::invalid_argument("weight sequence has no finite power-summability index");
  if (M != *Mopt)
    throw std::invalid_argument("M must be the smallest power-summability index of the weights");
  if (N < M) throw std::invalid_argument("the chain needs degree N >= M");
  if (N > kMaxPolarizationDegree)
    throw std::invalid_argument("degree exceeds the polarization budget");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("epsilon must be a finite positive real");
  if (q.target() != HomogeneousPolynomial::Target::Scalar || q.degree() != N)
    throw std::invalid_argument("q must be a scalar N-homogeneous polynomial");
  if (q.dim() < 2) throw std::invalid_argument("the chain needs at least two coordinates");
  if (!witness.finitely_supported() || witness.materialized() > q.dim())
    throw std::invalid_argument("witness must live in the polynomial's variables");

  const std::size_t dim = q.dim();
  ChainReport rep;
  rep.id = "lb-chain-polynomial";
  rep.params = {detail::weight_label(w), N, M, dim, epsilon};

  const double eta = epsilon * epsilon / 4.0;
  const double beta = epsilon;

  SearchResult res = max_norm(q, w, 32, seed);
  const TruncatedVector& a = res.point;
  double qa = q.evaluate_scalar(a);
  double qw = std::fabs(q.evaluate_scalar(witness));
  rep.chain.push_back(detail::make_entry(
      "eta-gate", "witness value clears the norm minus the eta modulus", qw, res.value - eta,
      qw > res.value - eta));

  double dist = norm_W(subtract(a, witness), w);
  rep.chain.push_back(detail::make_entry(
      "witness-closeness", "attainment point stays within the beta modulus of the witness", dist,
      beta, dist < beta));
  rep.chain.push_back(detail::make_entry(
      "lemma-half-gate", "two-point certificate machinery needs distance below one half", dist,
      0.5, dist < 0.5));
  if (!(dist < 0.5))
    throw std::invalid_argument("witness is too far from the attainment point to certify");

  PerturbationCertificate cert = lemma2_certify(a, witness, w);
  rep.chain.push_back(detail::make_entry(
      "certificate", "insertion certificate carries a strictly positive radius", cert.delta, 0.0,
      cert.delta > 0.0));

  const double binom_nm = binomial(static_cast<unsigned>(N), static_cast<unsigned>(M));
  const double a1pow = pow_int(a.at(1), static_cast<unsigned>(N - M));
  double ident_dev = 0.0;
  for (std::size_t n = std::min<std::size_t>(cert.n0, dim); n <= dim; ++n) {
    double lhs = binom_nm * detail::mixed_form_at(q, a, n, M);
    double rhs = (n % 2 == 1 ? -1.0 : 1.0) * a1pow;
    ident_dev = std::max(ident_dev, std::fabs(lhs - rhs));
  }
  rep.chain.push_back(detail::make_entry(
      "sign-alternation-identity",
      "scaled mixed form alternates as the signed first-coordinate power",
      ident_dev, 1e-10, ident_dev <= 1e-10));

  auto [alo, ahi] = detail::asymptotic_window(cert.n0, dim);
  double dich_max = -std::numeric_limits<double>::infinity();
  for (std::size_t n = alo; n <= ahi; ++n) {
    double phi = detail::mixed_form_at(q, a, n, M);
    dich_max = std::max(dich_max, qa >= 0.0 ? phi : -phi);
  }
  rep.chain.push_back(detail::make_entry(
      "sign-dichotomy",
      "asymptotic surrogate past the truncation edge: mixed form keeps the sign forced by the "
      "attained value",
      dich_max, 0.0, dich_max <= 1e-9));

  double a1abs = pow_int(std::fabs(a.at(1)), static_cast<unsigned>(N - M));
  rep.chain.push_back(detail::make_entry(
      "attainment-coordinate-bound",
      "first coordinate of the attainment point is pinched by binom(N,M) epsilon", a1abs,
      binom_nm * epsilon, a1abs <= binom_nm * epsilon));

  detail::finish_verdict(rep);
  return rep;
}

/* Multilinear half: the diagonal N-form has value exactly one on every
 * diagonal basis tuple, so any form vanishing there sits at distance at
 * least one — quantified against the requested closeness epsilon. */
inline ChainReport lb_chain_multilinear(const WeightSequence& w, std::size_t N, std::size_t dim,
                                        double epsilon) {
  std::optional<unsigned> Mopt = smallest_ellr_index(w);
  if (!Mopt) throw std::invalid_argument("weight sequence has no finite power-summability index");
  if (N == 0 || N > kMaxPolarizationDegree)
    throw std::invalid_argument("degree outside the polarization budget");
  if (dim == 0) throw std::invalid_argument("dimension must be >= 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw std::invalid_argument("epsilon must be a finite positive real");

  ChainReport rep;
  rep.id = "lb-chain-multilinear";
  rep.params = {detail::weight_label(w), N, *Mopt, dim, epsilon};

  HomogeneousPolynomial diag = gallery("lb-complex", w, N, std::nullopt, dim);
  double worst_dev = 0.0;
  for (std::size_t n = 1; n <= dim; ++n) {
    std::vector<TruncatedVector> args(N, TruncatedVector::basis(n));
    worst_dev = std::max(worst_dev, std::fabs(polarize_scalar(diag, args) - 1.0));
  }
  rep.chain.push_back(detail::make_entry(
      "diagonal-value", "diagonal form evaluates to one on every diagonal basis tuple",
      worst_dev, 1e-10, worst_dev <= 1e-10));

  // A competitor that kills the last diagonal direction: the same form with
  // the final variable's diagonal term removed.
  HomogeneousPolynomial truncated = HomogeneousPolynomial::scalar(N, dim);
  for (std::size_t i = 0; i + 1 < dim; ++i) {
    std::vector<unsigned> alpha(dim, 0);
    alpha[i] = static_cast<unsigned>(N);
    truncated.add_term(1, alpha, 1.0);
  }
  std::vector<TruncatedVector> last(N, TruncatedVector::basis(dim));
  double gap = std::fabs(polarize_scalar(diag, last) - polarize_scalar(truncated, last));
  rep.chain.push_back(detail::make_entry(
      "approximant-gap", "any form vanishing on the late diagonal sits at distance one or more",
      gap, 1.0, gap >= 1.0 - 1e-10));

  rep.chain.push_back(detail::make_entry(
      "closeness-vs-gap", "requested closeness must exceed the diagonal gap", gap, epsilon,
      gap < epsilon));

  detail::finish_verdict(rep);
  return rep;
}

}  // namespace lorentz
