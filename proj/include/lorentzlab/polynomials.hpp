#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorentzlab/numeric.hpp"
#include "lorentzlab/sequences.hpp"
#include "lorentzlab/weights.hpp"

namespace lorentz {

inline constexpr std::size_t kMaxPolarizationDegree = 8;

/* N-homogeneous polynomial on the first `dim` coordinates. Targets are
 * either the scalars or the diagonal l_r family (component i is its own
 * polynomial; the output vector is measured in l_r). Terms are stored
 * sparsely as exponent multi-indices of total degree N. */
class HomogeneousPolynomial {
 public:
  enum class Target { Scalar, DiagonalEllR };
  using TermMap = std::map<std::vector<unsigned>, double>;

  HomogeneousPolynomial() = default;

  static HomogeneousPolynomial scalar(std::size_t degree, std::size_t dim) {
    return HomogeneousPolynomial(degree, dim, Target::Scalar, 0.0, 1);
  }

  static HomogeneousPolynomial diagonal(std::size_t degree, std::size_t dim, double r) {
    if (!(r >= 1.0))
      throw std::invalid_argument("diagonal targets need an l_r exponent with r >= 1");
    return HomogeneousPolynomial(degree, dim, Target::DiagonalEllR, r, dim);
  }

  std::size_t degree() const { return degree_; }
  std::size_t dim() const { return dim_; }
  Target target() const { return target_; }
  double target_r() const {
    if (target_ != Target::DiagonalEllR)
      throw std::logic_error("target_r() applies to diagonal targets only");
    return r_;
  }
  std::size_t components() const { return comps_.size(); }
  const TermMap& terms(std::size_t component = 1) const {
    check_component(component);
    return comps_[component - 1];
  }

  /* Adds coeff * x^alpha to the given component (1 for scalar targets).
   * Coefficients accumulate; exact zero sums are pruned. */
  void add_term(std::size_t component, std::vector<unsigned> alpha, double coeff) {
    check_component(component);
    if (alpha.size() != dim_)
      throw std::invalid_argument("exponent multi-index must have one entry per dimension");
    std::size_t total = 0;
    for (unsigned e : alpha) total += e;
    if (total != degree_)
      throw std::invalid_argument("multi-index degree " + std::to_string(total) +
                                  " does not match the polynomial degree " +
                                  std::to_string(degree_));
    if (!std::isfinite(coeff)) throw std::invalid_argument("coefficients must be finite");
    TermMap& m = comps_[component - 1];
    auto it = m.find(alpha);
    if (it == m.end()) {
      if (coeff != 0.0) m.emplace(std::move(alpha), coeff);
    } else {
      it->second += coeff;
      if (it->second == 0.0) m.erase(it);
    }
  }

  bool is_zero() const {
    for (const TermMap& m : comps_)
      if (!m.empty()) return false;
    return true;
  }

  /* Values of every component at x. Only the first `dim` coordinates are
   * read; a finitely supported x carrying mass past them is a dimension
   * mismatch, while tails are truncated silently (the polynomial lives on
   * the truncation). */
  std::vector<double> evaluate_components(const TruncatedVector& x) const {
    if (x.finitely_supported() && x.support_end() > dim_)
      throw std::invalid_argument("vector support exceeds the polynomial dimension");
    std::vector<double> vals(dim_);
    for (std::size_t i = 1; i <= dim_; ++i) vals[i - 1] = x.at(i);
    std::vector<double> out(comps_.size(), 0.0);
    for (std::size_t c = 0; c < comps_.size(); ++c) {
      KahanSum acc;
      for (const auto& [alpha, coeff] : comps_[c]) {
        double term = coeff;
        for (std::size_t i = 0; i < dim_; ++i)
          if (alpha[i] != 0) term *= pow_int(vals[i], alpha[i]);
        acc.add(term);
      }
      out[c] = acc.value();
    }
    return out;
  }

  double evaluate_scalar(const TruncatedVector& x) const {
    if (target_ != Target::Scalar)
      throw std::logic_error("evaluate_scalar() applies to scalar targets only");
    return evaluate_components(x)[0];
  }

  /* ||P(x)||: absolute value for scalars, l_r norm of the component vector
   * for diagonal targets. */
  double output_norm(const TruncatedVector& x) const {
    std::vector<double> vals = evaluate_components(x);
    if (target_ == Target::Scalar) return std::fabs(vals[0]);
    KahanSum acc;
    for (double v : vals) acc.add(std::pow(std::fabs(v), r_));
    return std::pow(acc.value(), 1.0 / r_);
  }

  /* Per-component gradient at x: out[c][j] = d P_c / d x_j. */
  std::vector<std::vector<double>> gradient(const TruncatedVector& x) const {
    std::vector<double> vals(dim_);
    for (std::size_t i = 1; i <= dim_; ++i) vals[i - 1] = x.at(i);
    std::vector<std::vector<double>> out(comps_.size(), std::vector<double>(dim_, 0.0));
    for (std::size_t c = 0; c < comps_.size(); ++c) {
      for (const auto& [alpha, coeff] : comps_[c]) {
        for (std::size_t j = 0; j < dim_; ++j) {
          if (alpha[j] == 0) continue;
          double term = coeff * double(alpha[j]);
          for (std::size_t i = 0; i < dim_; ++i) {
            unsigned e = alpha[i] - (i == j ? 1 : 0);
            if (e != 0) term *= pow_int(vals[i], e);
          }
          out[c][j] += term;
        }
      }
    }
    return out;
  }

  HomogeneousPolynomial scaled(double factor) const {
    if (!std::isfinite(factor)) throw std::invalid_argument("scale factor must be finite");
    HomogeneousPolynomial out(*this);
    for (TermMap& m : out.comps_) {
      if (factor == 0.0) {
        m.clear();
        continue;
      }
      for (auto& [alpha, coeff] : m) coeff *= factor;
    }
    return out;
  }

 private:
  HomogeneousPolynomial(std::size_t degree, std::size_t dim, Target t, double r,
                        std::size_t ncomp)
      : degree_(degree), dim_(dim), target_(t), r_(r), comps_(ncomp) {
    if (degree_ == 0) throw std::invalid_argument("degree must be >= 1");
    if (dim_ == 0) throw std::invalid_argument("dimension must be >= 1");
  }

  void check_component(std::size_t component) const {
    if (component == 0 || component > comps_.size())
      throw std::out_of_range("component index out of range");
  }

  std::size_t degree_ = 1;
  std::size_t dim_ = 1;
  Target target_ = Target::Scalar;
  double r_ = 0.0;
  std::vector<TermMap> comps_{TermMap{}};
};

/* Sum of two polynomials of identical shape (degree, dim, target). */
inline HomogeneousPolynomial add(const HomogeneousPolynomial& p,
                                 const HomogeneousPolynomial& q) {
  if (p.degree() != q.degree() || p.dim() != q.dim() || p.target() != q.target() ||
      p.components() != q.components())
    throw std::invalid_argument("polynomial shapes do not match");
  HomogeneousPolynomial out(p);
  for (std::size_t c = 1; c <= q.components(); ++c)
    for (const auto& [alpha, coeff] : q.terms(c)) out.add_term(c, alpha, coeff);
  return out;
}

/* Product of two scalar polynomials (degrees add). */
inline HomogeneousPolynomial multiply(const HomogeneousPolynomial& p,
                                      const HomogeneousPolynomial& q) {
  if (p.target() != HomogeneousPolynomial::Target::Scalar ||
      q.target() != HomogeneousPolynomial::Target::Scalar)
    throw std::invalid_argument("polynomial products are defined for scalar targets");
  if (p.dim() != q.dim()) throw std::invalid_argument("polynomial dimensions do not match");
  HomogeneousPolynomial out =
      HomogeneousPolynomial::scalar(p.degree() + q.degree(), p.dim());
  for (const auto& [a1, c1] : p.terms())
    for (const auto& [a2, c2] : q.terms()) {
      std::vector<unsigned> alpha(a1);
      for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] += a2[i];
      out.add_term(1, std::move(alpha), c1 * c2);
    }
  return out;
}

inline HomogeneousPolynomial power(const HomogeneousPolynomial& p, std::size_t k) {
  if (k == 0) throw std::invalid_argument("polynomial powers need k >= 1 to stay homogeneous");
  HomogeneousPolynomial out(p);
  for (std::size_t i = 1; i < k; ++i) out = multiply(out, p);
  return out;
}

/* The scalar polynomial x -> <c, x> raised later via power(); degree 1. */
inline HomogeneousPolynomial linear_form(const std::vector<double>& c) {
  if (c.empty()) throw std::invalid_argument("linear forms need at least one coordinate");
  HomogeneousPolynomial out = HomogeneousPolynomial::scalar(1, c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::vector<unsigned> alpha(c.size(), 0);
    alpha[i] = 1;
    out.add_term(1, std::move(alpha), c[i]);
  }
  return out;
}

/* Component i of a diagonal-target polynomial as a standalone scalar one. */
inline HomogeneousPolynomial component_polynomial(const HomogeneousPolynomial& p,
                                                  std::size_t i) {
  HomogeneousPolynomial out = HomogeneousPolynomial::scalar(p.degree(), p.dim());
  for (const auto& [alpha, coeff] : p.terms(i)) out.add_term(1, alpha, coeff);
  return out;
}

/* sum_i c_i * Q_i(x)^M for a vector-target Q: the diagonal composition the
 * counterexample chains run on (q circ Q with q(y) = sum c_i y(i)^M). */
inline HomogeneousPolynomial diagonal_compose(const std::vector<double>& c, std::size_t M,
                                              const HomogeneousPolynomial& Q) {
  if (Q.target() != HomogeneousPolynomial::Target::DiagonalEllR)
    throw std::invalid_argument("diagonal composition needs a diagonal-target inner map");
  if (c.size() != Q.components())
    throw std::invalid_argument("one outer coefficient per component is required");
  if (M == 0) throw std::invalid_argument("outer degree must be >= 1");
  HomogeneousPolynomial out = HomogeneousPolynomial::scalar(M * Q.degree(), Q.dim());
  for (std::size_t i = 1; i <= Q.components(); ++i) {
    if (c[i - 1] == 0.0) continue;
    HomogeneousPolynomial comp = component_polynomial(Q, i);
    if (comp.is_zero()) continue;
    out = add(out, power(comp, M).scaled(c[i - 1]));
  }
  return out;
}

/* The symmetric N-linear form associated to P, evaluated by the signed
 * polarization average over 2^N sign patterns:
 *   Phi(x_1..x_N) = (1 / (2^N N!)) sum_eps eps_1...eps_N P(sum_j eps_j x_j).
 * Returns one value per component. */
inline std::vector<double> polarize_components(const HomogeneousPolynomial& p,
                                               const std::vector<TruncatedVector>& args) {
  const std::size_t n = p.degree();
  if (args.size() != n)
    throw std::invalid_argument("polarization needs exactly degree-many arguments, got " +
                                std::to_string(args.size()));
  if (n > kMaxPolarizationDegree)
    throw std::invalid_argument("polarization degree capped at " +
                                std::to_string(kMaxPolarizationDegree));
  std::vector<KahanSum> acc(p.components());
  for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
    double sign = 1.0;
    TruncatedVector sum(std::vector<double>{0.0});
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (std::size_t(1) << j)) {
        sum = add(sum, args[j]);
      } else {
        sum = subtract(sum, args[j]);
        sign = -sign;
      }
    }
    std::vector<double> vals = p.evaluate_components(sum);
    for (std::size_t c = 0; c < vals.size(); ++c) acc[c].add(sign * vals[c]);
  }
  double denom = std::pow(2.0, double(n)) * factorial(n);
  std::vector<double> out(p.components());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = acc[c].value() / denom;
  return out;
}

inline double polarize_scalar(const HomogeneousPolynomial& p,
                              const std::vector<TruncatedVector>& args) {
  if (p.target() != HomogeneousPolynomial::Target::Scalar)
    throw std::logic_error("polarize_scalar() applies to scalar targets only");
  return polarize_components(p, args)[0];
}

/* Phi composed with coordinate projections: x -> Phi(T_{k_1} x, ..., T_{k_N} x)
 * where T_k keeps the first k coordinates. On a monomial with index multiset
 * (i_1..i_N) the coefficient picks up perm(B) / N! with B[j][p] = [i_p <= k_j]:
 * of the N! ways to hand the monomial's variables to the N slots, exactly
 * perm(B) survive every projection. Exact, no floating polarization. */
inline HomogeneousPolynomial truncation_approximant(const HomogeneousPolynomial& p,
                                                    const std::vector<std::size_t>& ks) {
  const std::size_t n = p.degree();
  if (ks.size() != n)
    throw std::invalid_argument("one projection level per polarization slot is required");
  for (std::size_t k : ks) {
    if (k == 0 || k > p.dim())
      throw std::invalid_argument("projection levels must lie in [1, dim]");
  }
  if (n > kMaxPolarizationDegree)
    throw std::invalid_argument("approximant degree capped at " +
                                std::to_string(kMaxPolarizationDegree));
  HomogeneousPolynomial out(p.scaled(0.0));
  const double nfact = factorial(n);
  for (std::size_t c = 1; c <= p.components(); ++c) {
    for (const auto& [alpha, coeff] : p.terms(c)) {
      std::vector<std::size_t> idx;  // index multiset, one entry per degree
      for (std::size_t i = 0; i < alpha.size(); ++i)
        for (unsigned rep = 0; rep < alpha[i]; ++rep) idx.push_back(i + 1);
      // Permanent of B over subsets of positions (bitmask dynamic program).
      std::vector<double> dp(std::size_t(1) << n, 0.0);
      dp[0] = 1.0;
      for (std::size_t row = 0; row < n; ++row) {
        std::vector<double> ndp(dp.size(), 0.0);
        for (std::size_t s = 0; s < dp.size(); ++s) {
          if (dp[s] == 0.0) continue;
          if (std::size_t(__builtin_popcountll(s)) != row) continue;
          for (std::size_t pcol = 0; pcol < n; ++pcol) {
            if (s & (std::size_t(1) << pcol)) continue;
            if (idx[pcol] <= ks[row]) ndp[s | (std::size_t(1) << pcol)] += dp[s];
          }
        }
        dp.swap(ndp);
      }
      double perm = dp[(std::size_t(1) << n) - 1];
      if (perm != 0.0) out.add_term(c, alpha, coeff * perm / nfact);
    }
  }
  return out;
}

/* The named counterexample polynomials at truncation n. Vector-valued
 * entries land in the diagonal l_M target; M defaults to the smallest
 * integer putting the weight into l_M. */
inline HomogeneousPolynomial gallery(const std::string& name, const WeightSequence& w,
                                     std::size_t N, std::optional<std::size_t> M,
                                     std::size_t n, const std::vector<int>& signs = {}) {
  if (N == 0) throw std::invalid_argument("gallery degree must be >= 1");
  if (n == 0) throw std::invalid_argument("gallery dimension must be >= 1");
  auto pick_M = [&]() -> std::size_t {
    if (M.has_value()) {
      if (*M == 0) throw std::invalid_argument("M must be >= 1");
      return *M;
    }
    std::optional<std::size_t> m = smallest_ellr_index(w);
    if (!m.has_value())
      throw std::invalid_argument("M is required for explicit weight lists");
    return *m;
  };
  auto e = [&](std::size_t i, unsigned deg) {
    std::vector<unsigned> alpha(n, 0);
    alpha[i - 1] = deg;
    return alpha;
  };

  if (name == "diag-N") {
    // With an l_M target: Q(x) = (x(i)^N)_i. Without M: the scalar trace
    // sum_i x(i)^N.
    if (M.has_value()) {
      HomogeneousPolynomial q = HomogeneousPolynomial::diagonal(N, n, double(pick_M()));
      for (std::size_t i = 1; i <= n; ++i) q.add_term(i, e(i, unsigned(N)), 1.0);
      return q;
    }
    HomogeneousPolynomial q = HomogeneousPolynomial::scalar(N, n);
    for (std::size_t i = 1; i <= n; ++i) q.add_term(1, e(i, unsigned(N)), 1.0);
    return q;
  }
  if (name == "real-BP") {
    // Q(x) = (x(1)^{N-1} x(i))_i into l_M.
    if (N < 2) throw std::invalid_argument("real-BP needs degree >= 2");
    HomogeneousPolynomial q = HomogeneousPolynomial::diagonal(N, n, double(pick_M()));
    for (std::size_t i = 1; i <= n; ++i) {
      std::vector<unsigned> alpha(n, 0);
      alpha[0] += unsigned(N - 1);
      alpha[i - 1] += 1;
      q.add_term(i, std::move(alpha), 1.0);
    }
    return q;
  }
  if (name == "lb-complex") {
    HomogeneousPolynomial q = HomogeneousPolynomial::scalar(N, n);
    for (std::size_t i = 1; i <= n; ++i) q.add_term(1, e(i, unsigned(N)), 1.0);
    return q;
  }
  if (name == "lb-real") {
    // q(x) = x(1)^{N-M} sum_i (-1)^i x(i)^M.
    std::size_t m = pick_M();
    if (m > N) throw std::invalid_argument("lb-real needs M <= N");
    HomogeneousPolynomial q = HomogeneousPolynomial::scalar(N, n);
    for (std::size_t i = 1; i <= n; ++i) {
      std::vector<unsigned> alpha(n, 0);
      alpha[0] += unsigned(N - m);
      alpha[i - 1] += unsigned(m);
      q.add_term(1, std::move(alpha), (i % 2 == 1) ? -1.0 : 1.0);
    }
    return q;
  }
  if (name == "sign-qPa") {
    // q(x) = sum_i lambda_i^M x(i)^M from a sign pattern lambda in {+-1}^n.
    std::size_t m = pick_M();
    if (signs.size() != n)
      throw std::invalid_argument("sign-qPa needs one sign per coordinate");
    HomogeneousPolynomial q = HomogeneousPolynomial::scalar(m, n);
    for (std::size_t i = 1; i <= n; ++i) {
      int s = signs[i - 1];
      if (s != 1 && s != -1) throw std::invalid_argument("signs must be +1 or -1");
      double lam_m = (m % 2 == 0) ? 1.0 : double(s);
      q.add_term(1, e(i, unsigned(m)), lam_m);
    }
    return q;
  }
  throw std::invalid_argument("unknown gallery entry: " + name);
}

}  // namespace lorentz
