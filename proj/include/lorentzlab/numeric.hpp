#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lorentz {

/* Compensated (Kahan) accumulator. Prefix sums of slowly decaying weights
 * are consumed by sup-type quotients, so the usual O(n eps) drift of naive
 * summation is not acceptable at n ~ 1e5. */
class KahanSum {
 public:
  void add(double x) {
    double y = x - comp_;
    double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double pow_int(double base, unsigned e) {
  double r = 1.0;
  double b = base;
  while (e > 0) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1u;
  }
  return r;
}

inline double factorial(unsigned n) {
  double r = 1.0;
  for (unsigned k = 2; k <= n; ++k) r *= k;
  return r;
}

inline double binomial(unsigned n, unsigned k) {
  if (k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (unsigned j = 1; j <= k; ++j) r = r * double(n - k + j) / double(j);
  return std::round(r);
}

inline bool nearly_equal(double a, double b, double tol) {
  double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= tol * scale;
}

}  // namespace lorentz
