// Copyright 2026 The iam Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "iam/errors.hpp"

namespace iam {

// A non-negative real used as a multiplier of the sample count N, either as
// a double or as an exact rational num/den. Index comparisons against
// x*N are exact in both representations: there is no rounding of x*N to an
// integer and no epsilon.
class Fraction {
 public:
  constexpr Fraction() = default;

  // Implicit so that `guarded_erm(samples, 0.25)` reads naturally.
  Fraction(double value) : value_(value) {  // NOLINT
    require(std::isfinite(value) && value >= 0.0,
            "fraction must be finite and non-negative, got " +
                std::to_string(value));
  }

  static Fraction ratio(std::uint64_t num, std::uint64_t den) {
    require(den > 0, "fraction denominator must be positive");
    Fraction f;
    f.num_ = num;
    f.den_ = den;
    f.value_ = static_cast<double>(num) / static_cast<double>(den);
    f.exact_ = true;
    return f;
  }

  double value() const noexcept { return value_; }
  bool is_ratio() const noexcept { return exact_; }
  std::uint64_t numerator() const noexcept { return num_; }
  std::uint64_t denominator() const noexcept { return den_; }

  // x*N evaluated in double, for display only.
  double times(std::size_t n) const noexcept {
    return value_ * static_cast<double>(n);
  }

  // Sign of (k - x*n), computed exactly.
  int compare_index(std::size_t k, std::size_t n) const noexcept {
    if (exact_) {
      const auto lhs = static_cast<unsigned __int128>(k) * den_;
      const auto rhs = static_cast<unsigned __int128>(num_) * n;
      return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
    }
    // p = fl(x*n) and err = x*n - p exactly (fma); k is an integer, so when
    // k != p the spacing between them dominates |err|.
    const double dn = static_cast<double>(n);
    const double p = value_ * dn;
    const double err = std::fma(value_, dn, -p);
    const double dk = static_cast<double>(k);
    if (dk != p) return dk > p ? 1 : -1;
    return err < 0 ? 1 : (err > 0 ? -1 : 0);
  }

  // Smallest integer i >= 1 with i > x*n.
  std::size_t first_index_above(std::size_t n) const noexcept {
    if (exact_) {
      const auto prod = static_cast<unsigned __int128>(num_) * n;
      return static_cast<std::size_t>(prod / den_) + 1;
    }
    const double p = value_ * static_cast<double>(n);
    const double fl = std::floor(p);
    auto i = static_cast<std::size_t>(fl);
    if (compare_index(i, n) <= 0) ++i;
    return i == 0 ? 1 : i;
  }

  Fraction scaled(std::uint64_t factor) const {
    if (exact_) return ratio(num_ * factor, den_);
    return Fraction(value_ * static_cast<double>(factor));
  }

  // Exact x >= a/b.
  bool at_least(std::uint64_t a, std::uint64_t b) const noexcept {
    // x >= a/b  <=>  !(a > x*b)
    return compare_index(a, b) <= 0;
  }

 private:
  double value_ = 0.0;
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
  bool exact_ = false;
};

// The ERM regularization parameter c, 0 <= c < 1. Index i is eligible when
// i > c*N.
class Guard {
 public:
  Guard() = default;
  Guard(double c) : Guard(Fraction(c)) {}  // NOLINT
  Guard(Fraction c) : c_(c) {              // NOLINT
    require(c.value() < 1.0 || (c.is_ratio() && c.numerator() < c.denominator()),
            "guard c must lie in [0, 1), got " + std::to_string(c.value()));
  }

  static Guard ratio(std::uint64_t num, std::uint64_t den) {
    return Guard(Fraction::ratio(num, den));
  }

  double value() const noexcept { return c_.value(); }
  const Fraction& fraction() const noexcept { return c_; }

  std::size_t first_eligible(std::size_t n) const noexcept {
    return c_.first_index_above(n);
  }

  // c >= m/n, i.e. the top m positions of an n-vector are never eligible.
  bool covers(std::size_t m, std::size_t n) const noexcept {
    return first_eligible(n) > m;
  }

 private:
  Fraction c_;
};

}  // namespace iam
