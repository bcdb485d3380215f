#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lorentzlab/norm_search.hpp"
#include "lorentzlab/numeric.hpp"
#include "lorentzlab/polynomials.hpp"
#include "lorentzlab/sequences.hpp"
#include "lorentzlab/weights.hpp"

namespace lorentz {

struct TensorTerm {
  double lambda = 0.0;
  TruncatedVector x;
  std::optional<TruncatedVector> y;  // present on all terms or on none
};

/* A finite-type element of the symmetric tensor power: u = sum_j lambda_j
 * x_j^{tensor N}, optionally carrying a second factor y_j per term for
 * vector-valued pairings. Terms are stored as given; no implicit
 * simplification happens at construction. */
class SymmetricTensorRep {
 public:
  SymmetricTensorRep(std::size_t degree, std::size_t dim, std::vector<TensorTerm> terms)
      : degree_(degree), dim_(dim), terms_(std::move(terms)) {
    if (degree_ == 0) throw std::invalid_argument("tensor degree must be >= 1");
    if (dim_ == 0) throw std::invalid_argument("tensor dimension must be >= 1");
    bool with_y = !terms_.empty() && terms_.front().y.has_value();
    for (const TensorTerm& t : terms_) {
      if (!std::isfinite(t.lambda))
        throw std::invalid_argument("tensor coefficients must be finite");
      validate_factor(t.x, "x");
      if (t.y.has_value() != with_y)
        throw std::invalid_argument("either every term carries a y factor or none does");
      if (t.y) validate_factor(*t.y, "y");
    }
  }

  std::size_t degree() const { return degree_; }
  std::size_t dim() const { return dim_; }
  bool vector_valued() const { return !terms_.empty() && terms_.front().y.has_value(); }
  const std::vector<TensorTerm>& terms() const { return terms_; }

 private:
  void validate_factor(const TruncatedVector& v, const char* which) const {
    if (!v.finitely_supported())
      throw std::invalid_argument("tensor factors must be finitely supported");
    if (v.materialized() > dim_)
      throw std::invalid_argument(std::string("tensor factor ") + which +
                                  " has support past the declared dimension");
    if (v.is_zero())
      throw std::invalid_argument(std::string("tensor factor ") + which + " must be nonzero");
  }

  std::size_t degree_ = 1;
  std::size_t dim_ = 1;
  std::vector<TensorTerm> terms_;
};

/* Duality pairing <u, P> = sum_j lambda_j P(x_j), with the diagonal ell_r /
 * ell_r' bracket <P(x_j), y_j> on the vector-valued side. */
inline double pair(const SymmetricTensorRep& u, const HomogeneousPolynomial& p) {
  if (p.degree() != u.degree()) throw std::invalid_argument("tensor and polynomial degrees differ");
  if (p.dim() != u.dim()) throw std::invalid_argument("tensor and polynomial dimensions differ");
  if (u.vector_valued() != (p.target() == HomogeneousPolynomial::Target::DiagonalEllR))
    throw std::invalid_argument("tensor shape and polynomial target disagree");
  KahanSum acc;
  for (const TensorTerm& t : u.terms()) {
    if (t.y) {
      std::vector<double> vals = p.evaluate_components(t.x);
      KahanSum inner;
      for (std::size_t i = 0; i < vals.size(); ++i) inner.add(vals[i] * t.y->at(i + 1));
      acc.add(t.lambda * inner.value());
    } else {
      acc.add(t.lambda * p.evaluate_scalar(t.x));
    }
  }
  return acc.value();
}

namespace detail {

/* Weight of one representation term: lambda * ||x||_W^N * (||y||_W or 1).
 * Shared by the representation value and the measure so the two agree bit
 * for bit. */
inline double term_weight(const TensorTerm& t, std::size_t degree, const WeightSequence& w,
                          double* nx_out = nullptr, double* ny_out = nullptr) {
  double nx = norm_W(t.x, w);
  double wgt = t.lambda * pow_int(nx, static_cast<unsigned>(degree));
  double ny = 1.0;
  if (t.y) ny = norm_W(*t.y, w);
  if (t.y) wgt *= ny;
  if (nx_out) *nx_out = nx;
  if (ny_out) *ny_out = ny;
  return wgt;
}

}  // namespace detail

/* pi-value of the representation as written: sum |lambda_j| ||x_j||_W^N
 * (||y_j||_W). An upper bound for the symmetric projective norm. */
inline double representation_value(const SymmetricTensorRep& u, const WeightSequence& w) {
  KahanSum acc;
  for (const TensorTerm& t : u.terms()) acc.add(std::fabs(detail::term_weight(t, u.degree(), w)));
  return acc.value();
}

struct MeasureAtom {
  double weight = 0.0;
  TruncatedVector xhat;
  std::optional<TruncatedVector> yhat;
};

struct DiscreteMeasure {
  std::vector<MeasureAtom> atoms;

  double total_variation() const {
    KahanSum acc;
    for (const MeasureAtom& a : atoms) acc.add(std::fabs(a.weight));
    return acc.value();
  }
};

/* Discrete representing measure of a finite-type tensor: one atom per term,
 * vectors normalized onto the unit sphere and all magnitude (including the
 * sign, so odd and even degrees are handled uniformly) moved into the atom
 * weight. By homogeneity <u, P> = sum_atoms weight * <P(xhat), yhat>, and
 * the total variation equals the representation's pi-value — the discrete
 * shadow of the integral-representation bound ||mu|| <= pi(u). */
inline DiscreteMeasure representing_measure(const SymmetricTensorRep& u,
                                            const WeightSequence& w) {
  DiscreteMeasure mu;
  mu.atoms.reserve(u.terms().size());
  for (const TensorTerm& t : u.terms()) {
    double nx = 1.0, ny = 1.0;
    MeasureAtom atom;
    atom.weight = detail::term_weight(t, u.degree(), w, &nx, &ny);
    atom.xhat = t.x.scaled(1.0 / nx);
    if (t.y) atom.yhat = t.y->scaled(1.0 / ny);
    mu.atoms.push_back(std::move(atom));
  }
  return mu;
}

/* Pairing of a measure against P, matching pair() on the generating tensor. */
inline double pair(const DiscreteMeasure& mu, const HomogeneousPolynomial& p) {
  KahanSum acc;
  for (const MeasureAtom& a : mu.atoms) {
    if (a.yhat) {
      std::vector<double> vals = p.evaluate_components(a.xhat);
      KahanSum inner;
      for (std::size_t i = 0; i < vals.size(); ++i) inner.add(vals[i] * a.yhat->at(i + 1));
      acc.add(a.weight * inner.value());
    } else {
      acc.add(a.weight * p.evaluate_scalar(a.xhat));
    }
  }
  return acc.value();
}

namespace detail {

inline void require_scalar_case(const SymmetricTensorRep& u, const char* op) {
  if (u.vector_valued())
    throw std::invalid_argument(std::string(op) + " is defined for scalar-case tensors only");
}

/* Merge collinear factors: x_k = c x_j folds lambda_k c^N into lambda_j.
 * Never increases the pi-value (triangle inequality collapses with equality
 * along a ray). Terms whose coefficient cancels exactly are dropped. */
inline std::vector<std::pair<double, std::vector<double>>> merged_terms(
    const SymmetricTensorRep& u) {
  std::vector<std::pair<double, std::vector<double>>> out;
  for (const TensorTerm& t : u.terms()) {
    std::vector<double> xc(u.dim(), 0.0);
    for (std::size_t i = 0; i < t.x.materialized(); ++i) xc[i] = t.x.coords()[i];
    bool folded = false;
    for (auto& [lam, base] : out) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < base.size(); ++i) {
        num += base[i] * xc[i];
        den += base[i] * base[i];
      }
      double c = num / den;
      double scale = 0.0;
      for (std::size_t i = 0; i < base.size(); ++i)
        scale = std::max({scale, std::fabs(xc[i]), std::fabs(c * base[i])});
      bool collinear = true;
      for (std::size_t i = 0; i < base.size() && collinear; ++i)
        collinear = std::fabs(xc[i] - c * base[i]) <= 1e-13 * scale;
      if (collinear && std::isfinite(c) && c != 0.0) {
        lam += t.lambda * pow_int(c, static_cast<unsigned>(u.degree()));
        folded = true;
        break;
      }
    }
    if (!folded) out.emplace_back(t.lambda, std::move(xc));
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const auto& pr) { return pr.first == 0.0; }),
            out.end());
  return out;
}

inline double merged_pi(const std::vector<std::pair<double, std::vector<double>>>& terms,
                        std::size_t degree, const WeightSequence& w) {
  KahanSum acc;
  for (const auto& [lam, xc] : terms)
    acc.add(std::fabs(lam) *
            pow_int(norm_W(TruncatedVector{std::vector<double>(xc)}, w),
                    static_cast<unsigned>(degree)));
  return acc.value();
}

/* Dense symmetric coefficient tensor of u, laid out as dim^N doubles. */
inline std::vector<double> dense_tensor(
    const std::vector<std::pair<double, std::vector<double>>>& terms, std::size_t degree,
    std::size_t dim, std::size_t cells) {
  std::vector<double> a(cells, 0.0);
  for (const auto& [lam, xc] : terms) {
    for (std::size_t li = 0; li < cells; ++li) {
      double prod = lam;
      std::size_t rest = li;
      for (std::size_t l = 0; l < degree; ++l) {
        prod *= xc[rest % dim];
        rest /= dim;
      }
      a[li] += prod;
    }
  }
  return a;
}

inline double frobenius(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

/* Rank-one symmetric peeling: shifted symmetric power iteration extracts a
 * direction, the coefficients are refit jointly against the original tensor
 * (Gram entries <v_j, v_k>^N), and the candidate counts only if it
 * reproduces the tensor to within 1e-12. */
inline std::optional<std::vector<std::pair<double, std::vector<double>>>> peel_rank_one(
    const std::vector<double>& a0, std::size_t degree, std::size_t dim, std::mt19937_64& rng) {
  const std::size_t cells = a0.size();
  const double scale = std::max(1.0, frobenius(a0));
  std::vector<double> a = a0;
  std::vector<std::vector<double>> dirs;
  std::vector<double> coeffs;
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  const std::size_t rank_cap = 3 * dim + 2;

  for (std::size_t r = 0; r < rank_cap; ++r) {
    if (frobenius(a) <= 1e-13 * scale) break;
    std::vector<double> v(dim);
    for (double& c : v) c = box(rng);
    double alpha = 1.0 + frobenius(a);
    for (int it = 0; it < 120; ++it) {
      std::vector<double> nv(dim, 0.0);
      for (std::size_t li = 0; li < cells; ++li) {
        double prod = a[li];
        std::size_t rest = li / dim;
        for (std::size_t l = 1; l < degree; ++l) {
          prod *= v[rest % dim];
          rest /= dim;
        }
        nv[li % dim] += prod;
      }
      double shift_dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) nv[i] += alpha * v[i];
      double nrm = 0.0;
      for (double c : nv) nrm += c * c;
      nrm = std::sqrt(nrm);
      if (nrm == 0.0) break;
      double delta = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        nv[i] /= nrm;
        delta = std::max(delta, std::fabs(nv[i] - v[i]));
        shift_dot += nv[i] * v[i];
      }
      v.swap(nv);
      if (delta < 1e-15 && shift_dot > 0.0) break;
    }
    double lam = 0.0;
    for (std::size_t li = 0; li < cells; ++li) {
      double prod = a[li];
      std::size_t rest = li;
      for (std::size_t l = 0; l < degree; ++l) {
        prod *= v[rest % dim];
        rest /= dim;
      }
      lam += prod;
    }
    if (std::fabs(lam) <= 1e-14 * scale) break;
    for (std::size_t li = 0; li < cells; ++li) {
      double prod = lam;
      std::size_t rest = li;
      for (std::size_t l = 0; l < degree; ++l) {
        prod *= v[rest % dim];
        rest /= dim;
      }
      a[li] -= prod;
    }
    dirs.push_back(v);
    coeffs.push_back(lam);
  }
  if (dirs.empty()) return std::nullopt;

  // Joint coefficient refit: minimize ||a0 - sum lam_j v_j^N||_F.
  const std::size_t k = dirs.size();
  std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t l = 0; l < k; ++l) {
      double d = 0.0;
      for (std::size_t i = 0; i < dim; ++i) d += dirs[j][i] * dirs[l][i];
      g[j][l] = pow_int(d, static_cast<unsigned>(degree));
    }
    double b = 0.0;
    for (std::size_t li = 0; li < cells; ++li) {
      double prod = a0[li];
      std::size_t rest = li;
      for (std::size_t l = 0; l < degree; ++l) {
        prod *= dirs[j][rest % dim];
        rest /= dim;
      }
      b += prod;
    }
    g[j][k] = b;
  }
  for (std::size_t col = 0; col < k; ++col) {  // Gaussian elimination
    std::size_t piv = col;
    for (std::size_t rrow = col + 1; rrow < k; ++rrow)
      if (std::fabs(g[rrow][col]) > std::fabs(g[piv][col])) piv = rrow;
    std::swap(g[col], g[piv]);
    if (std::fabs(g[col][col]) < 1e-14) return std::nullopt;
    for (std::size_t rrow = 0; rrow < k; ++rrow) {
      if (rrow == col) continue;
      double f = g[rrow][col] / g[col][col];
      for (std::size_t cc = col; cc <= k; ++cc) g[rrow][cc] -= f * g[col][cc];
    }
  }
  std::vector<std::pair<double, std::vector<double>>> cand;
  for (std::size_t j = 0; j < k; ++j) cand.emplace_back(g[j][k] / g[j][j], dirs[j]);

  // Accept only representations that reproduce the tensor.
  std::vector<double> recon = dense_tensor(cand, degree, dim, cells);
  double err = 0.0;
  for (std::size_t li = 0; li < cells; ++li) err += (recon[li] - a0[li]) * (recon[li] - a0[li]);
  if (std::sqrt(err) > 1e-12 * scale) return std::nullopt;
  return cand;
}

}  // namespace detail

/* Upper bound for the symmetric projective norm: the minimum pi-value over
 * the input representation (collinear terms merged), the exactly-summed
 * vector for degree 1, and any exact low-rank representation found by
 * randomized symmetric peeling. Elementary tensors short-circuit: the dual
 * witness (norming functional)^N meets the representation value, so the
 * single-term pi-value is provably the norm itself. */
inline double pis_upper(const SymmetricTensorRep& u, const WeightSequence& w,
                        std::size_t restarts = 8, std::uint64_t seed = 1) {
  detail::require_scalar_case(u, "pis_upper");
  auto merged = detail::merged_terms(u);
  if (merged.empty()) return 0.0;
  double best = detail::merged_pi(merged, u.degree(), w);
  if (merged.size() == 1) return best;
  if (u.degree() == 1) {
    std::vector<double> sum(u.dim(), 0.0);
    for (const auto& [lam, xc] : merged)
      for (std::size_t i = 0; i < u.dim(); ++i) sum[i] += lam * xc[i];
    return std::min(best, norm_W(TruncatedVector(std::move(sum)), w));
  }

  double cells_d = 1.0;
  for (std::size_t l = 0; l < u.degree(); ++l) cells_d *= double(u.dim());
  if (cells_d > 2e6) return best;  // dense peeling out of reach; keep the rep bound
  const std::size_t cells = static_cast<std::size_t>(cells_d);
  std::vector<double> a0 = detail::dense_tensor(merged, u.degree(), u.dim(), cells);

  std::mt19937_64 rng(seed);
  for (std::size_t r = 0; r < restarts; ++r) {
    auto cand = detail::peel_rank_one(a0, u.degree(), u.dim(), rng);
    if (!cand) continue;
    best = std::min(best, detail::merged_pi(*cand, u.degree(), w));
  }
  return best;
}

struct PisLowerDetail {
  double value = 0.0;
  bool exact = true;  // winner certified by an analytically normalized functional
  std::optional<HomogeneousPolynomial> witness;
};

namespace detail {

/* Lower-bound value of the N-th power of a linear functional against u. */
inline double linear_power_pairing(const SymmetricTensorRep& u, const TruncatedVector& f) {
  KahanSum acc;
  for (const TensorTerm& t : u.terms())
    acc.add(t.lambda * pow_int(dot(f, t.x), static_cast<unsigned>(u.degree())));
  return acc.value();
}

}  // namespace detail

/* Lower bound via the dual characterization pi_s(u) = sup over the unit
 * polynomial ball of |<u, P>|. Candidates: per-term norming functionals
 * (exact unit polynomial norm by construction — the d(w,1) unit vector g
 * pairs below ||.||_W everywhere, so ||(g')^N|| = 1), random d(w,1)-unit
 * functionals (also exact), and a few random sparse polynomials normalized
 * by a certified upper bound on their norm — dividing by an upper bound
 * keeps the quotient below the true supremum, but the witness is then only
 * approximately norming, so a win coming from it clears the `exact` flag. */
inline PisLowerDetail pis_lower_detail(const SymmetricTensorRep& u, const WeightSequence& w,
                                       std::size_t family = 16, std::uint64_t seed = 1) {
  detail::require_scalar_case(u, "pis_lower");
  PisLowerDetail out;
  if (u.terms().empty()) return out;

  std::vector<TruncatedVector> funcs;
  for (const TensorTerm& t : u.terms()) funcs.push_back(dual_norm_oracle(t.x, w).argmax);
  if (u.degree() == 1) {
    // Degree one: the tensor is the summed vector, whose norming functional
    // closes the bracket exactly.
    std::vector<double> sum(u.dim(), 0.0);
    for (const TensorTerm& t : u.terms())
      for (std::size_t i = 0; i < t.x.materialized(); ++i) sum[i] += t.lambda * t.x.coords()[i];
    TruncatedVector sv{std::vector<double>(sum)};
    if (!sv.is_zero()) funcs.push_back(dual_norm_oracle(sv, w).argmax);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  for (std::size_t k = 0; k < family; ++k) {
    std::vector<double> g(u.dim());
    for (double& v : g) v = box(rng);
    TruncatedVector gv{std::vector<double>(g)};
    double n1 = norm_dws(gv, w, 1.0);
    if (n1 == 0.0) continue;
    funcs.push_back(gv.scaled(1.0 / n1));
  }
  std::optional<TruncatedVector> winner;
  for (const TruncatedVector& f : funcs) {
    double val = std::fabs(detail::linear_power_pairing(u, f));
    if (val > out.value) {
      out.value = val;
      winner = f;
    }
  }
  if (winner) {
    std::vector<double> c(u.dim(), 0.0);
    for (std::size_t i = 1; i <= u.dim(); ++i) c[i - 1] = winner->at(i);
    HomogeneousPolynomial lin = linear_form(c);
    out.witness = (u.degree() == 1) ? lin : power(lin, u.degree());
  }

  // Sampled non-linear candidates, normalized by the search (caveat applies).
  if (u.dim() <= 4 && family >= 8 && u.degree() >= 2) {
    std::uniform_int_distribution<std::size_t> pick(0, u.dim() - 1);
    for (int k = 0; k < 2; ++k) {
      HomogeneousPolynomial q = HomogeneousPolynomial::scalar(u.degree(), u.dim());
      for (int m = 0; m < 3; ++m) {
        std::vector<unsigned> alpha(u.dim(), 0);
        for (std::size_t l = 0; l < u.degree(); ++l) alpha[pick(rng)] += 1;
        q.add_term(1, alpha, box(rng));
      }
      if (q.is_zero()) continue;
      double nrm = brute_force_norm(q, w, 9).upper;
      if (nrm <= 1e-9) continue;
      double val = std::fabs(pair(u, q)) / nrm;
      if (val > out.value) {
        out.value = val;
        out.exact = false;
        out.witness = q.scaled(1.0 / nrm);
      }
    }
  }
  return out;
}

inline double pis_lower(const SymmetricTensorRep& u, const WeightSequence& w,
                        std::size_t family = 16, std::uint64_t seed = 1) {
  return pis_lower_detail(u, w, family, seed).value;
}

struct PisBracket {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_exact = true;
  std::optional<HomogeneousPolynomial> witness;
};

/* The symmetric projective norm reported honestly as a bracket; it collapses
 * (to 1e-9) exactly in the provable cases such as elementary tensors. */
inline PisBracket pis_bracket(const SymmetricTensorRep& u, const WeightSequence& w,
                              std::size_t restarts = 8, std::size_t family = 16,
                              std::uint64_t seed = 1) {
  PisBracket b;
  PisLowerDetail lo = pis_lower_detail(u, w, family, seed);
  b.lower = lo.value;
  b.lower_exact = lo.exact;
  b.witness = std::move(lo.witness);
  b.upper = pis_upper(u, w, restarts, seed);
  return b;
}

}  // namespace lorentz
