#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorentzlab/certificates.hpp"
#include "lorentzlab/numeric.hpp"
#include "lorentzlab/polynomials.hpp"
#include "lorentzlab/sequences.hpp"
#include "lorentzlab/weights.hpp"

namespace lorentz {

/* The unit ball of ||.||_W at truncation dim: for every k <= dim the sum of
 * the k largest magnitudes is at most W(k). A polytope. */
struct WBall {
  WeightSequence weight;
  std::size_t dim = 1;

  bool contains(const TruncatedVector& x, double tol = 1e-12) const {
    return norm_W(x, weight) <= 1.0 + tol;
  }
};

namespace detail {

/* Euclidean projection onto the cone of non-increasing nonnegative vectors:
 * pool-adjacent-violators for the monotone fit, then a clamp at zero (exact
 * for a uniform lower bound). */
inline std::vector<double> pav_decreasing_nonneg(const std::vector<double>& v) {
  struct Block {
    double sum;
    std::size_t len;
  };
  std::vector<Block> stack;
  stack.reserve(v.size());
  for (double x : v) {
    stack.push_back({x, 1});
    while (stack.size() >= 2) {
      Block& prev = stack[stack.size() - 2];
      Block& last = stack.back();
      if (prev.sum * double(last.len) < last.sum * double(prev.len)) {
        prev.sum += last.sum;
        prev.len += last.len;
        stack.pop_back();
      } else {
        break;
      }
    }
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const Block& b : stack) {
    double mean = std::max(0.0, b.sum / double(b.len));
    out.insert(out.end(), b.len, mean);
  }
  return out;
}

}  // namespace detail

/* Euclidean projection onto the W-ball. Reduction: strip signs, sort
 * magnitudes decreasingly (the ball is sign- and permutation-invariant, so
 * the projection inherits the sign/order of the input); for sorted z the
 * k-largest constraints become prefix constraints, and the multiplier vector
 * nu (suffix sums of the prefix multipliers) ranges exactly over the
 * non-increasing nonnegative cone, giving
 *   proj(z) = z - PAV_{decreasing, >=0}(z - w).
 * Feasibility and the variational inequality follow from the polar-cone
 * characterization of PAV; both are also asserted at runtime. */
inline TruncatedVector project_onto_wball(const TruncatedVector& x, const WeightSequence& w) {
  if (!x.finitely_supported())
    throw std::invalid_argument("projection is implemented for finitely supported vectors");
  const std::size_t n = x.materialized();
  if (n == 0) return x;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(x.coords()[a]) > std::fabs(x.coords()[b]);
  });
  std::vector<double> z(n), wv(n);
  WeightCursor wc(w);
  for (std::size_t r = 0; r < n; ++r) {
    z[r] = std::fabs(x.coords()[order[r]]);
    wc.advance();
    wv[r] = wc.value();
  }
  std::vector<double> diff(n);
  for (std::size_t r = 0; r < n; ++r) diff[r] = z[r] - wv[r];
  std::vector<double> nu = detail::pav_decreasing_nonneg(diff);

  std::vector<double> ys(n);
  double prefix_y = 0.0, prefix_w = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    ys[r] = std::max(0.0, z[r] - nu[r]);
    if (r > 0 && ys[r] > ys[r - 1] + 1e-12)
      throw std::logic_error("projection lost monotonicity; dual reduction violated");
    if (r > 0) ys[r] = std::min(ys[r], ys[r - 1]);  // absorb roundoff ties
    prefix_y += ys[r];
    prefix_w += wv[r];
    if (prefix_y > prefix_w + 1e-9)
      throw std::logic_error("projection left the ball; dual reduction violated");
  }

  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double s = x.coords()[order[r]] < 0.0 ? -1.0 : 1.0;
    out[order[r]] = s * ys[r];
  }
  return TruncatedVector(std::move(out));
}

struct StartTrace {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SearchResult {
  TruncatedVector point;
  double value = 0.0;
  std::size_t starts = 0;
  std::vector<StartTrace> traces;
  bool attained = false;
  std::optional<PerturbationCertificate> certificate;
};

namespace detail {

/* ||P(x)||^2 and its gradient; squared to stay differentiable at zeros of a
 * vector-valued P. */
inline double objective_and_gradient(const HomogeneousPolynomial& p,
                                     const std::vector<double>& xv, std::vector<double>* grad) {
  TruncatedVector x{std::vector<double>(xv)};
  std::vector<double> vals = p.evaluate_components(x);
  if (grad) grad->assign(xv.size(), 0.0);
  if (p.target() == HomogeneousPolynomial::Target::Scalar) {
    double v = vals[0];
    if (grad) {
      std::vector<std::vector<double>> g = p.gradient(x);
      for (std::size_t j = 0; j < xv.size(); ++j) (*grad)[j] = 2.0 * v * g[0][j];
    }
    return v * v;
  }
  const double r = p.target_r();
  KahanSum srm;
  for (double v : vals) srm.add(std::pow(std::fabs(v), r));
  double S = srm.value();
  if (grad && S > 0.0) {
    std::vector<std::vector<double>> g = p.gradient(x);
    double outer = 2.0 * std::pow(S, 2.0 / r - 1.0);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (vals[i] == 0.0) continue;
      double sgn = vals[i] < 0.0 ? -1.0 : 1.0;
      double f = outer * std::pow(std::fabs(vals[i]), r - 1.0) * sgn;
      for (std::size_t j = 0; j < xv.size(); ++j) (*grad)[j] += f * g[i][j];
    }
  }
  return std::pow(S, 2.0 / r);
}

inline std::vector<double> project_vec(const std::vector<double>& v, const WeightSequence& w) {
  TruncatedVector p = project_onto_wball(TruncatedVector{std::vector<double>(v)}, w);
  return p.coords();
}

}  // namespace detail

/* Multi-start projected gradient ascent on ||P(x)||^2 over the W-ball.
 * Deterministic for a fixed seed: starts are the signed basis vectors, the
 * projected all-ones vector, then seeded uniform box samples, processed
 * sequentially with lexicographic tie-breaking. The result value is a lower
 * bound for the true norm (exact at desk scale whenever some start's basin
 * contains the maximizer). */
inline SearchResult max_norm(const HomogeneousPolynomial& p, const WeightSequence& w,
                             std::size_t starts = 0, std::uint64_t seed = 1) {
  const std::size_t n = p.dim();
  if (starts == 0) starts = 64 * n;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);

  const double armijo = 1e-4;
  const double grad_tol = 1e-10;
  const std::size_t max_iter = 10000;

  SearchResult best;
  best.value = -1.0;
  std::vector<double> gradbuf, pgbuf;
  for (std::size_t s = 0; s < starts; ++s) {
    std::vector<double> x0(n, 0.0);
    if (s < 2 * n) {
      x0[s / 2] = (s % 2 == 0) ? 1.0 : -1.0;
    } else if (s == 2 * n) {
      x0.assign(n, 1.0);
    } else {
      for (double& v : x0) v = box(rng);
    }
    std::vector<double> x = detail::project_vec(x0, w);
    double f = detail::objective_and_gradient(p, x, &gradbuf);
    StartTrace trace;
    double eta = 1.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
      trace.iterations = it + 1;
      // Projected-gradient stationarity measure.
      const double probe = 1e-6;
      std::vector<double> xp(x);
      for (std::size_t j = 0; j < n; ++j) xp[j] += probe * gradbuf[j];
      pgbuf = detail::project_vec(xp, w);
      double pgnorm = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double d = (pgbuf[j] - x[j]) / probe;
        pgnorm += d * d;
      }
      if (std::sqrt(pgnorm) < grad_tol) {
        trace.converged = true;
        break;
      }
      // Backtracking ascent step.
      bool moved = false;
      double step = eta;
      for (int bt = 0; bt < 60; ++bt) {
        std::vector<double> cand(x);
        for (std::size_t j = 0; j < n; ++j) cand[j] += step * gradbuf[j];
        cand = detail::project_vec(cand, w);
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) inner += gradbuf[j] * (cand[j] - x[j]);
        double fc = detail::objective_and_gradient(p, cand, nullptr);
        if (fc >= f + armijo * inner && fc > f) {
          x.swap(cand);
          f = fc;
          detail::objective_and_gradient(p, x, &gradbuf);
          eta = std::min(1.0, step * 2.0);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) {
        trace.converged = true;
        break;
      }
    }
    TruncatedVector pt{std::vector<double>(x)};
    trace.value = p.output_norm(pt);  // independent of the squared objective
    bool take = false;
    double scale = std::max(1.0, best.value);
    if (trace.value > best.value + 1e-12 * scale) {
      take = true;
    } else if (trace.value >= best.value - 1e-12 * scale &&
               std::lexicographical_compare(x.begin(), x.end(), best.point.coords().begin(),
                                            best.point.coords().end())) {
      take = true;
    }
    if (take) {
      best.point = pt;
      best.value = std::max(best.value, trace.value);
      best.attained = true;
    }
    best.traces.push_back(trace);
  }
  best.starts = starts;
  best.value = p.output_norm(best.point);
  try {
    best.certificate = certify_predual_point(best.point, w);
  } catch (const std::exception&) {
    best.certificate.reset();
  }
  return best;
}

struct BruteForceBracket {
  double lower = 0.0;
  double upper = 0.0;
  TruncatedVector at;
};

/* Dense oracle for small dimensions: every grid point of the bounding box
 * [-1, 1]^n is projected onto the ball (projection is nonexpansive, so the
 * projected grid h/2-covers the ball in l_2 after the sqrt(n) conversion)
 * and the best value plus a crude Lipschitz radius gives a certified upper
 * bound. Refinement rounds shrink the box around the incumbent to sharpen
 * the lower bound only. */
inline BruteForceBracket brute_force_norm(const HomogeneousPolynomial& p,
                                          const WeightSequence& w, std::size_t resolution = 33) {
  const std::size_t n = p.dim();
  if (n > 4) throw std::invalid_argument("the dense oracle handles dim <= 4 only");
  if (resolution < 5) throw std::invalid_argument("resolution must be at least 5");

  // Lipschitz bound of ||P(.)|| on the unit box: per coordinate j, sum of
  // |coeff| * alpha_j over all terms of all components bounds |d_j|.
  std::vector<double> lj(n, 0.0);
  for (std::size_t c = 1; c <= p.components(); ++c)
    for (const auto& [alpha, coeff] : p.terms(c))
      for (std::size_t j = 0; j < n; ++j) lj[j] += std::fabs(coeff) * double(alpha[j]);
  double lip = 0.0;
  for (double v : lj) lip += v * v;
  lip = std::sqrt(lip);

  BruteForceBracket out;
  out.at = TruncatedVector{std::vector<double>(n, 0.0)};
  std::vector<double> lo(n, -1.0), hi(n, 1.0);
  double h = 2.0 / double(resolution - 1);
  for (int round = 0; round < 4; ++round) {
    std::vector<std::size_t> idx(n, 0);
    while (true) {
      std::vector<double> g(n);
      for (std::size_t j = 0; j < n; ++j)
        g[j] = lo[j] + (hi[j] - lo[j]) * double(idx[j]) / double(resolution - 1);
      TruncatedVector y = project_onto_wball(TruncatedVector{std::move(g)}, w);
      double val = p.output_norm(y);
      if (val > out.lower) {
        out.lower = val;
        out.at = y;
      }
      std::size_t j = 0;
      while (j < n && ++idx[j] == resolution) idx[j++] = 0;
      if (j == n) break;
    }
    if (round == 0) out.upper = out.lower + lip * h * std::sqrt(double(n)) / 2.0;
    // Shrink the box around the incumbent for the next lower-bound pass.
    double span = 1.5 * (hi[0] - lo[0]) / double(resolution - 1);
    for (std::size_t j = 0; j < n; ++j) {
      double c = out.at.coords()[j];
      lo[j] = std::max(-1.0, c - span);
      hi[j] = std::min(1.0, c + span);
    }
  }
  return out;
}

struct LocalMaxReport {
  bool local_max_ok = false;
  double g0 = 0.0;
  double gstar = 0.0;
  double lambda_star = 0.0;
  std::optional<double> mixed_form;   // phi(a..a, e_n x M) for scalar maps
  bool mixed_form_ok = true;
  std::optional<double> basis_image;  // ||P(e_n)|| for strictly convex targets
  bool basis_image_ok = true;
  bool pass = false;
};

namespace detail {

/* A polynomial in dim variables, viewed as a map on the sequence space,
 * ignores every coordinate past dim; restricting keeps evaluate()'s strict
 * shape contract while letting diagnostics probe such coordinates. */
inline TruncatedVector restrict_to(const TruncatedVector& x, std::size_t dim) {
  if (x.finitely_supported() && x.materialized() <= dim) return x;
  std::vector<double> c(dim);
  for (std::size_t i = 1; i <= dim; ++i) c[i - 1] = x.at(i);
  return TruncatedVector(std::move(c));
}

}  // namespace detail

/* Shadow of the extreme-point lemmas at a claimed attainment point: with a
 * valid certificate (n0, delta) for a, the function g(lambda) =
 * ||P(a + lambda e_n)|| must peak at lambda = 0 for n >= n0; scalar maps
 * additionally must keep the mixed form phi(a,..,a, e_n M times) <= 0 when
 * P(a) > 0, and strictly convex diagonal targets must send late basis
 * vectors to zero. Gallery counterexamples fail exactly these checks; maps
 * in finitely many variables satisfy them exactly once n passes the last
 * variable (they send e_n to zero, which is the lemma's conclusion). */
inline LocalMaxReport local_max_diagnostic(const HomogeneousPolynomial& p,
                                           const TruncatedVector& a,
                                           const PerturbationCertificate& cert, std::size_t n) {
  if (n < cert.n0)
    throw std::invalid_argument("diagnostic coordinate must be at least cert.n0");
  CertificateCheck chk = verify_certificate(cert, 33, std::max(n, 10 * cert.n0));
  if (!chk.pass) throw std::invalid_argument("certificate failed verification");

  const WeightSequence& w = cert.weight;
  LocalMaxReport rep;
  auto g = [&](double lam) {
    return p.output_norm(detail::restrict_to(add_basis_multiple(a, n, lam), p.dim()));
  };
  rep.g0 = g(0.0);
  rep.gstar = rep.g0;
  rep.lambda_star = 0.0;
  const std::size_t grid = 201;
  for (std::size_t i = 0; i < grid; ++i) {
    double lam = -cert.delta + 2.0 * cert.delta * double(i) / double(grid - 1);
    double v = g(lam);
    if (v > rep.gstar) {
      rep.gstar = v;
      rep.lambda_star = lam;
    }
  }
  // Golden-section sharpening around the incumbent.
  {
    double lo = std::max(-cert.delta, rep.lambda_star - 2.0 * cert.delta / double(grid - 1));
    double hi = std::min(cert.delta, rep.lambda_star + 2.0 * cert.delta / double(grid - 1));
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = g(c), fd = g(d);
    for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = g(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + gr * (hi - lo);
        fd = g(d);
      }
    }
    double mid = 0.5 * (lo + hi), fm = g(mid);
    if (fm > rep.gstar) {
      rep.gstar = fm;
      rep.lambda_star = mid;
    }
  }
  rep.local_max_ok = rep.gstar <= rep.g0 + 1e-9;

  const TruncatedVector ar = detail::restrict_to(a, p.dim());
  const TruncatedVector en = detail::restrict_to(TruncatedVector::basis(n), p.dim());
  if (p.target() == HomogeneousPolynomial::Target::Scalar && p.evaluate_scalar(ar) > 0.0) {
    std::optional<std::size_t> M = smallest_ellr_index(w);
    if (M.has_value() && *M <= p.degree() && p.degree() <= kMaxPolarizationDegree) {
      std::vector<TruncatedVector> args(p.degree() - *M, ar);
      args.insert(args.end(), *M, en);
      rep.mixed_form = polarize_scalar(p, args);
      rep.mixed_form_ok = *rep.mixed_form <= 1e-9;
    }
  }
  if (p.target() == HomogeneousPolynomial::Target::DiagonalEllR && p.target_r() > 1.0) {
    rep.basis_image = p.output_norm(en);
    rep.basis_image_ok = *rep.basis_image <= 1e-9;
  }
  rep.pass = rep.local_max_ok && rep.mixed_form_ok && rep.basis_image_ok;
  return rep;
}

}  // namespace lorentz
