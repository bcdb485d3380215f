#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lorentzlab/numeric.hpp"
#include "lorentzlab/weights.hpp"

namespace lorentz {

/* Analytic continuation of a vector past its materialized coordinates:
 * x(m + j) = c * t^j for j >= 1, where m is the number of stored coords. */
struct GeometricTail {
  double c = 0.0;
  double t = 0.5;
};

/* A real sequence given by finitely many stored coordinates, optionally
 * followed by a geometric tail. Finitely supported vectors are exactly the
 * ones with no tail. The representation is closed under the operations used
 * here (rearrangement, scaling, adding a multiple of a basis vector, and
 * sums of vectors whose tails share a ratio). */
class TruncatedVector {
 public:
  TruncatedVector() = default;

  explicit TruncatedVector(std::vector<double> coords,
                           std::optional<GeometricTail> tail = std::nullopt)
      : coords_(std::move(coords)), tail_(tail) {
    for (double v : coords_) {
      if (!std::isfinite(v))
        throw std::invalid_argument("vector coordinates must be finite");
    }
    if (tail_) {
      if (!std::isfinite(tail_->c) || !std::isfinite(tail_->t))
        throw std::invalid_argument("tail parameters must be finite");
      if (!(tail_->t > 0.0 && tail_->t < 1.0))
        throw std::invalid_argument("tail ratio must lie strictly inside (0, 1), got " +
                                    std::to_string(tail_->t));
      if (tail_->c == 0.0) tail_.reset();
    }
  }

  static TruncatedVector basis(std::size_t n, double scale = 1.0) {
    if (n == 0) throw std::invalid_argument("basis index must be >= 1");
    std::vector<double> c(n, 0.0);
    c[n - 1] = scale;
    return TruncatedVector(std::move(c));
  }

  const std::vector<double>& coords() const { return coords_; }
  const std::optional<GeometricTail>& tail() const { return tail_; }
  bool finitely_supported() const { return !tail_.has_value(); }
  std::size_t materialized() const { return coords_.size(); }

  double at(std::size_t i) const {
    if (i == 0) throw std::out_of_range("coordinate index must be >= 1");
    if (i <= coords_.size()) return coords_[i - 1];
    if (!tail_) return 0.0;
    return tail_->c * std::pow(tail_->t, double(i - coords_.size()));
  }

  bool is_zero() const {
    if (tail_) return false;
    for (double v : coords_)
      if (v != 0.0) return false;
    return true;
  }

  /* Largest index carrying a nonzero entry; 0 for the zero vector. Only
   * meaningful for finitely supported vectors. */
  std::size_t support_end() const {
    if (tail_) throw std::logic_error("support_end() requires a finitely supported vector");
    for (std::size_t i = coords_.size(); i > 0; --i)
      if (coords_[i - 1] != 0.0) return i;
    return 0;
  }

  TruncatedVector scaled(double alpha) const {
    if (!std::isfinite(alpha)) throw std::invalid_argument("scale factor must be finite");
    std::vector<double> c(coords_);
    for (double& v : c) v *= alpha;
    std::optional<GeometricTail> tl = tail_;
    if (tl) tl->c *= alpha;
    return TruncatedVector(std::move(c), tl);
  }

  TruncatedVector without_tail() const { return TruncatedVector(coords_); }

  /* A copy with at least m stored coordinates (tail values materialized,
   * the remaining tail re-anchored). */
  TruncatedVector materialized_to(std::size_t m) const {
    if (m <= coords_.size()) return *this;
    std::vector<double> c(coords_);
    c.reserve(m);
    for (std::size_t i = coords_.size() + 1; i <= m; ++i) c.push_back(at(i));
    std::optional<GeometricTail> tl;
    if (tail_) tl = GeometricTail{tail_->c * std::pow(tail_->t, double(m - coords_.size())), tail_->t};
    return TruncatedVector(std::move(c), tl);
  }

 private:
  std::vector<double> coords_;
  std::optional<GeometricTail> tail_;
};

inline TruncatedVector add(const TruncatedVector& x, const TruncatedVector& y) {
  if (x.tail() && y.tail() && x.tail()->t != y.tail()->t)
    throw std::invalid_argument("sum of two tails requires a common ratio");
  std::size_t m = std::max(x.materialized(), y.materialized());
  TruncatedVector xm = x.materialized_to(m);
  TruncatedVector ym = y.materialized_to(m);
  std::vector<double> c(m, 0.0);
  for (std::size_t i = 1; i <= m; ++i) c[i - 1] = xm.at(i) + ym.at(i);
  std::optional<GeometricTail> tl;
  double cc = (xm.tail() ? xm.tail()->c : 0.0) + (ym.tail() ? ym.tail()->c : 0.0);
  double tt = xm.tail() ? xm.tail()->t : (ym.tail() ? ym.tail()->t : 0.5);
  if (cc != 0.0 && (xm.tail() || ym.tail())) tl = GeometricTail{cc, tt};
  return TruncatedVector(std::move(c), tl);
}

inline TruncatedVector subtract(const TruncatedVector& x, const TruncatedVector& y) {
  return add(x, y.scaled(-1.0));
}

inline TruncatedVector add_basis_multiple(const TruncatedVector& x, std::size_t n,
                                          double lambda) {
  return add(x, TruncatedVector::basis(n, lambda));
}

/* <x, y> = sum_i x(i) y(i). The cross terms of two tails form a geometric
 * series with ratio t_x * t_y and are summed in closed form. */
inline double dot(const TruncatedVector& x, const TruncatedVector& y) {
  std::size_t m = std::max(x.materialized(), y.materialized());
  KahanSum acc;
  for (std::size_t i = 1; i <= m; ++i) acc.add(x.at(i) * y.at(i));
  if (x.tail() && y.tail()) {
    TruncatedVector xm = x.materialized_to(m);
    TruncatedVector ym = y.materialized_to(m);
    double u = xm.tail()->t * ym.tail()->t;
    acc.add(xm.tail()->c * ym.tail()->c * u / (1.0 - u));
  }
  return acc.value();
}

/* The first `depth` entries of the decreasing rearrangement |x|*, each with
 * the 1-based coordinate it came from, plus whatever tail remains after the
 * prefix. When the vector has a tail, materialized zero entries are dropped:
 * infinitely many positive tail values outrank them, so they never appear at
 * any finite rank. Ties prefer stored coordinates over tail values, and lower
 * indices over higher, which keeps the map deterministic.
 *
 * rest_mass is the total absolute mass past the prefix and is always set;
 * rest carries the remainder as a tail only when the remainder is purely
 * geometric (no stored entries left over). */
struct RearrangedPrefix {
  std::vector<double> values;
  std::vector<std::size_t> source;
  std::optional<GeometricTail> rest;
  double rest_mass = 0.0;
};

inline RearrangedPrefix rearranged_prefix(const TruncatedVector& x, std::size_t depth) {
  std::vector<std::pair<double, std::size_t>> mats;
  mats.reserve(x.materialized());
  for (std::size_t i = 1; i <= x.materialized(); ++i) {
    double v = std::fabs(x.coords()[i - 1]);
    if (x.tail() && v == 0.0) continue;
    mats.emplace_back(v, i);
  }
  std::stable_sort(mats.begin(), mats.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  RearrangedPrefix out;
  out.values.reserve(std::min(depth, mats.size() + depth));
  std::size_t fi = 0;
  std::size_t j = 1;  // next unconsumed tail exponent
  double cmag = x.tail() ? std::fabs(x.tail()->c) : 0.0;
  double t = x.tail() ? x.tail()->t : 0.0;
  double tv = cmag * t;
  while (out.values.size() < depth) {
    bool take_mat;
    if (fi < mats.size() && x.tail())
      take_mat = mats[fi].first >= tv;
    else if (fi < mats.size())
      take_mat = true;
    else if (x.tail())
      take_mat = false;
    else
      break;
    if (take_mat) {
      out.values.push_back(mats[fi].first);
      out.source.push_back(mats[fi].second);
      ++fi;
    } else {
      out.values.push_back(tv);
      out.source.push_back(x.materialized() + j);
      ++j;
      tv *= t;
    }
  }
  KahanSum pending;
  for (std::size_t i = fi; i < mats.size(); ++i) pending.add(mats[i].first);
  if (x.tail()) {
    double c_rest = cmag * std::pow(t, double(j - 1));
    out.rest_mass = pending.value() + c_rest * t / (1.0 - t);
    if (fi == mats.size()) out.rest = GeometricTail{c_rest, t};
  } else {
    out.rest_mass = pending.value();
  }
  return out;
}

/* x* as a vector in the same representation: stored part sorted, remaining
 * tail geometric with the original ratio. For finitely supported input the
 * trailing zeros stay materialized. */
inline TruncatedVector decreasing_rearrangement(const TruncatedVector& x) {
  if (!x.tail()) {
    std::vector<double> c(x.coords());
    for (double& v : c) v = std::fabs(v);
    std::stable_sort(c.begin(), c.end(), std::greater<double>());
    return TruncatedVector(std::move(c));
  }
  // Depth that provably exhausts the stored entries: every tail value past
  // exponent j* is below the smallest positive stored magnitude.
  double minpos = std::numeric_limits<double>::infinity();
  std::size_t npos = 0;
  for (double v : x.coords()) {
    if (v != 0.0) {
      minpos = std::min(minpos, std::fabs(v));
      ++npos;
    }
  }
  std::size_t depth = npos;
  if (npos > 0) {
    double cmag = std::fabs(x.tail()->c);
    double jstar = 1.0;
    if (cmag * x.tail()->t > minpos)
      jstar = std::ceil(std::log(minpos / cmag) / std::log(x.tail()->t)) + 1.0;
    if (!(jstar < 2e7)) throw std::runtime_error("rearrangement depth exceeds safety cap");
    depth = npos + std::size_t(std::max(1.0, jstar));
  }
  RearrangedPrefix rp = rearranged_prefix(x, depth);
  return TruncatedVector(std::move(rp.values), rp.rest);
}

/* ||x||_{w,s} = (sum_i |x|*(i)^s w(i))^{1/s}. Tail contributions decay like
 * (t^s)^j, so the sum is truncated once the remaining geometric bound drops
 * below 1e-16 of the accumulated value. */
inline double norm_dws(const TruncatedVector& x, const WeightSequence& w, double s) {
  if (!(s >= 1.0)) throw std::invalid_argument("d(w,s) exponent must satisfy s >= 1");
  if (x.is_zero()) return 0.0;
  TruncatedVector xs = decreasing_rearrangement(x);
  KahanSum acc;
  WeightCursor wc(w);
  for (std::size_t i = 1; i <= xs.materialized(); ++i) {
    wc.advance();
    double v = xs.coords()[i - 1];
    if (v == 0.0) break;
    acc.add(std::pow(v, s) * wc.value());
  }
  if (xs.tail()) {
    double ts = std::pow(xs.tail()->t, s);
    double term = std::pow(std::fabs(xs.tail()->c), s) * ts;  // j = 1 value before weight
    for (std::size_t guard = 0; guard < 20000000; ++guard) {
      wc.advance();
      acc.add(term * wc.value());
      if (term / (1.0 - ts) <= 1e-16 * acc.value()) break;
      term *= ts;
    }
  }
  return std::pow(acc.value(), 1.0 / s);
}

/* ||x||_W = sup_n (|x|*(1) + ... + |x|*(n)) / W(n). For finitely supported x
 * the supremum is attained no later than the support size, since past it the
 * numerator is constant while W grows. With a tail, scanning stops once the
 * whole remaining tail mass cannot lift any later quotient above the current
 * supremum by more than one part in 1e15. */
inline double norm_W(const TruncatedVector& x, const WeightSequence& w) {
  if (x.is_zero()) return 0.0;
  TruncatedVector xs = decreasing_rearrangement(x);
  KahanSum num;
  WeightCursor wc(w);
  double sup = 0.0;
  for (std::size_t i = 1; i <= xs.materialized(); ++i) {
    double v = xs.coords()[i - 1];
    if (v == 0.0 && !xs.tail()) break;
    wc.advance();
    num.add(v);
    sup = std::max(sup, num.value() / wc.prefix());
  }
  if (xs.tail()) {
    double t = xs.tail()->t;
    double term = std::fabs(xs.tail()->c) * t;
    for (std::size_t guard = 0; guard < 20000000; ++guard) {
      double rem = term * t / (1.0 - t);  // mass strictly after this term
      if (term + rem <= 1e-15 * sup * wc.prefix()) break;
      wc.advance();
      num.add(term);
      sup = std::max(sup, num.value() / wc.prefix());
      term *= t;
    }
  }
  return sup;
}

/* Independent check of ||.||_W through the extreme points of the d(w,1)
 * ball: vectors with k entries of magnitude 1/W(k). Pairing y against the
 * sign-matched extreme point supported on the k largest magnitudes of y
 * yields (|y|*(1) + ... + |y|*(k)) / W(k); the supremum over k is the dual
 * norm. Uses its own plain summation on purpose. */
struct DualOracleResult {
  double value = 0.0;
  std::size_t k = 0;
  TruncatedVector argmax;
};

inline DualOracleResult dual_norm_oracle(const TruncatedVector& y, const WeightSequence& w) {
  if (!y.finitely_supported())
    throw std::invalid_argument("the extreme-point oracle handles finitely supported vectors only");
  std::size_t n = y.materialized();
  if (n == 0) return DualOracleResult{0.0, 0, TruncatedVector(std::vector<double>{})};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(y.coords()[a]) > std::fabs(y.coords()[b]);
  });
  DualOracleResult best;
  double run = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    run += std::fabs(y.coords()[order[k - 1]]);
    double val = run / w.prefix(k);
    if (val > best.value) {
      best.value = val;
      best.k = k;
    }
  }
  if (best.k == 0) return DualOracleResult{0.0, 0, TruncatedVector(std::vector<double>(n, 0.0))};
  std::vector<double> pt(n, 0.0);
  for (std::size_t j = 0; j < best.k; ++j) {
    double yi = y.coords()[order[j]];
    double sgn = (yi < 0.0) ? -1.0 : 1.0;
    pt[order[j]] = sgn / w.prefix(best.k);
  }
  best.argmax = TruncatedVector(std::move(pt));
  return best;
}

/* l_r norm, with the tail summed in closed form. */
inline double ellr_norm(const TruncatedVector& x, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("l_r exponent must satisfy r >= 1");
  KahanSum acc;
  for (double v : x.coords()) acc.add(std::pow(std::fabs(v), r));
  if (x.tail()) {
    double tr = std::pow(x.tail()->t, r);
    acc.add(std::pow(std::fabs(x.tail()->c), r) * tr / (1.0 - tr));
  }
  return std::pow(acc.value(), 1.0 / r);
}

/* One data point of the embedding d*(w,1) -> l_r at the current truncation.
 * Requires a power-law weight with r*a > 1; otherwise the target space does
 * not even contain the weight and the embedding claim is vacuous. */
struct InclusionReport {
  double ellr = 0.0;
  double wnorm = 0.0;
  double ratio = 0.0;  // ellr / wnorm, the empirical embedding constant at x
};

inline InclusionReport inclusion_into_ellr(const TruncatedVector& x, const WeightSequence& w,
                                           double r) {
  std::optional<bool> member = weight_in_ellr(w, r);
  if (!member.has_value())
    throw std::invalid_argument("l_r membership is undecidable for explicit weight lists");
  if (!member.value())
    throw std::invalid_argument("embedding into l_r requires r * a > 1 for the power law");
  InclusionReport rep;
  rep.ellr = ellr_norm(x, r);
  rep.wnorm = norm_W(x, w);
  rep.ratio = (rep.wnorm == 0.0) ? 0.0 : rep.ellr / rep.wnorm;
  return rep;
}

/* Running empirical bound on the embedding constant, fed by repeated
 * inclusion reports. Kept outside the pure functions so they stay pure. */
class InclusionBoundTracker {
 public:
  void record(const InclusionReport& rep) {
    ++count_;
    best_ = std::max(best_, rep.ratio);
  }
  double bound() const { return best_; }
  std::size_t count() const { return count_; }

 private:
  double best_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace lorentz
