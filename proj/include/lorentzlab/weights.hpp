#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lorentzlab/numeric.hpp"

namespace lorentz {

/* An admissible weight sequence: w(1) = 1, strictly positive, non-increasing,
 * with divergent partial sums W(n) = w(1) + ... + w(n). Instances are either
 * generated from a power law w(i) = i^(-a) with 0 < a <= 1, in which case any
 * entry can be produced on demand, or taken verbatim from a finite list, in
 * which case nothing is known past the materialized prefix.
 *
 * Immutable after construction. Indices are 1-based to match the usual
 * sequence-space conventions; the accessors check their range. */
class WeightSequence {
 public:
  enum class Kind { PowerLaw, Explicit };

  static WeightSequence power(double a, std::size_t n) {
    if (!(a > 0.0) || !(a <= 1.0))
      throw std::invalid_argument("weight exponent must satisfy 0 < a <= 1, got " +
                                  std::to_string(a));
    if (n == 0) throw std::invalid_argument("weight length must be at least 1");
    WeightSequence w;
    w.kind_ = Kind::PowerLaw;
    w.a_ = a;
    w.values_.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) w.values_.push_back(std::pow(double(i), -a));
    w.build_prefix();
    return w;
  }

  static WeightSequence from_list(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("weight list must be nonempty");
    if (values.front() != 1.0)
      throw std::invalid_argument("weight list must start with w(1) = 1");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0))
        throw std::invalid_argument("weights must be strictly positive");
      if (i > 0 && values[i] > values[i - 1] + 1e-15)
        throw std::invalid_argument("weights must be non-increasing");
    }
    WeightSequence w;
    w.kind_ = Kind::Explicit;
    w.values_ = std::move(values);
    w.build_prefix();
    return w;
  }

  Kind kind() const { return kind_; }
  bool is_power() const { return kind_ == Kind::PowerLaw; }
  double exponent() const {
    if (kind_ != Kind::PowerLaw)
      throw std::logic_error("exponent() is only defined for power-law weights");
    return a_;
  }
  std::size_t size() const { return values_.size(); }

  double value(std::size_t i) const {
    check_index(i);
    return values_[i - 1];
  }

  /* W(i), the i-th partial sum. */
  double prefix(std::size_t i) const {
    check_index(i);
    return prefix_[i - 1];
  }

  /* A copy materialized out to at least m entries. Power-law weights extend
   * analytically; explicit lists cannot be extended and throw instead, since
   * a finite prefix says nothing about the continuation. */
  WeightSequence extended(std::size_t m) const {
    if (m <= size()) return *this;
    if (kind_ != Kind::PowerLaw)
      throw std::invalid_argument(
          "explicit weight list of length " + std::to_string(size()) +
          " cannot be evaluated at index " + std::to_string(m));
    WeightSequence w;
    w.kind_ = Kind::PowerLaw;
    w.a_ = a_;
    w.values_ = values_;
    w.values_.reserve(m);
    for (std::size_t i = size() + 1; i <= m; ++i)
      w.values_.push_back(std::pow(double(i), -a_));
    w.build_prefix();
    return w;
  }

 private:
  void build_prefix() {
    prefix_.clear();
    prefix_.reserve(values_.size());
    KahanSum acc;
    for (double v : values_) {
      acc.add(v);
      prefix_.push_back(acc.value());
    }
  }

  void check_index(std::size_t i) const {
    if (i == 0 || i > values_.size())
      throw std::out_of_range("weight index " + std::to_string(i) +
                              " outside materialized range [1, " +
                              std::to_string(values_.size()) + "]");
  }

  Kind kind_ = Kind::Explicit;
  double a_ = 0.0;
  std::vector<double> values_;
  std::vector<double> prefix_;
};

/* Forward walk over w(i) and W(i) for i = 1, 2, ... in order. Stays on the
 * materialized prefix while it lasts; past the end, power-law weights are
 * produced analytically (with compensated continuation of the partial sum)
 * and explicit lists throw. */
class WeightCursor {
 public:
  explicit WeightCursor(const WeightSequence& w) : w_(w) {}

  /* Moves to the next index and returns it (first call yields 1). */
  std::size_t advance() {
    ++i_;
    if (i_ <= w_.size()) {
      value_ = w_.value(i_);
      prefix_ = w_.prefix(i_);
    } else {
      if (!w_.is_power())
        throw std::out_of_range(
            "explicit weight list of length " + std::to_string(w_.size()) +
            " cannot be evaluated at index " + std::to_string(i_));
      value_ = std::pow(double(i_), -w_.exponent());
      overflow_.add(value_);
      prefix_ = w_.prefix(w_.size()) + overflow_.value();
    }
    return i_;
  }

  std::size_t index() const { return i_; }
  double value() const { return value_; }
  double prefix() const { return prefix_; }

 private:
  const WeightSequence& w_;
  std::size_t i_ = 0;
  double value_ = 0.0;
  double prefix_ = 0.0;
  KahanSum overflow_;
};

inline WeightSequence make_power_weight(double a, std::size_t n) {
  return WeightSequence::power(a, n);
}

inline WeightSequence make_explicit_weight(std::vector<double> values) {
  return WeightSequence::from_list(std::move(values));
}

/* Whether the weight itself lies in l_r. Decidable only for power laws,
 * where sum i^(-ra) converges iff r*a > 1; a finite explicit prefix cannot
 * settle summability, so those report nullopt. */
inline std::optional<bool> weight_in_ellr(const WeightSequence& w, double r) {
  if (r < 1.0) throw std::invalid_argument("l_r exponent must satisfy r >= 1");
  if (!w.is_power()) return std::nullopt;
  return r * w.exponent() > 1.0;
}

/* Least natural M with M*a > 1. The comparison is done on the product, not
 * on floor(1/a), so boundary exponents such as a = 1/2 land on the strict
 * side: a = 1 gives 2, a = 1/2 gives 3. */
inline std::optional<unsigned> smallest_ellr_index(const WeightSequence& w) {
  if (!w.is_power()) return std::nullopt;
  double a = w.exponent();
  for (unsigned m = 1; m <= 1u << 30; ++m) {
    if (double(m) * a > 1.0) return m;
  }
  throw std::logic_error("no l_r index below 2^30; exponent is degenerate");
}

}  // namespace lorentz
