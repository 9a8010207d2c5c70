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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "iam/errors.hpp"
#include "iam/fraction.hpp"

namespace iam {

// Samples sorted non-increasingly. The first sentinel_top() positions are
// "+infinity" placeholders: they are not stored as floats, compare above
// every finite value, and must never be eligible for selection.
class SampleVector {
 public:
  SampleVector() = default;

  static SampleVector from_values(std::vector<double> values,
                                  std::size_t sentinel_top = 0) {
    validate(values);
    std::sort(values.begin(), values.end(), std::greater<>());
    return SampleVector(std::move(values), sentinel_top);
  }

  static SampleVector from_sorted(std::vector<double> values,
                                  std::size_t sentinel_top = 0) {
    validate(values);
    require(std::is_sorted(values.begin(), values.end(), std::greater<>()),
            "from_sorted requires non-increasing values");
    return SampleVector(std::move(values), sentinel_top);
  }

  std::size_t size() const noexcept { return sentinel_top_ + finite_.size(); }
  bool empty() const noexcept { return size() == 0; }
  std::size_t sentinel_top() const noexcept { return sentinel_top_; }
  std::span<const double> finite() const noexcept { return finite_; }

  bool is_sentinel(std::size_t i) const noexcept { return i <= sentinel_top_; }

  // 1-based; sentinels read as +infinity.
  double operator[](std::size_t i) const noexcept {
    return is_sentinel(i) ? std::numeric_limits<double>::infinity()
                          : finite_[i - sentinel_top_ - 1];
  }

  double max_finite() const {
    require(!finite_.empty(), "max_finite of a vector without finite entries");
    return finite_.front();
  }

  SampleVector with_sentinels(std::size_t m) const {
    return SampleVector(finite_, sentinel_top_ + m);
  }

 private:
  SampleVector(std::vector<double> finite, std::size_t sentinels)
      : finite_(std::move(finite)), sentinel_top_(sentinels) {}

  static void validate(const std::vector<double>& values) {
    for (double v : values) {
      require(std::isfinite(v) && v >= 0.0,
              "samples must be finite and non-negative");
    }
  }

  std::vector<double> finite_;
  std::size_t sentinel_top_ = 0;
};

struct ErmOutcome {
  double price = 0.0;
  std::size_t k_star = 0;        // 1-based index into the sorted vector
  double threshold = 0.0;        // c*N, for reporting
  std::size_t eligible_count = 0;
};

namespace detail {

// i * v_i in the widest native float. Every comparison of products in the
// library goes through this so that ties are resolved identically.
inline long double index_product(std::size_t i, double v) noexcept {
  return static_cast<long double>(i) * static_cast<long double>(v);
}

// Guarded ERM on finite values preceded by `sentinels` placeholders.
inline ErmOutcome erm_kernel(std::span<const double> finite_desc,
                             std::size_t sentinels, const Guard& c) {
  const std::size_t n = sentinels + finite_desc.size();
  require(n > 0, "guarded_erm requires a non-empty sample vector");
  const std::size_t first = c.first_eligible(n);
  if (first <= sentinels) {
    fail(ErrorKind::kSentinelEligible,
         "index " + std::to_string(first) + " is eligible but holds a sentinel (c*N = " +
             std::to_string(c.fraction().times(n)) + ", sentinels = " +
             std::to_string(sentinels) + ")");
  }
  // first <= n always holds because c < 1.
  long double best = -1.0L;
  std::size_t k = first;
  for (std::size_t i = first; i <= n; ++i) {
    const long double p = index_product(i, finite_desc[i - sentinels - 1]);
    if (p >= best) {  // ties go to the larger index
      best = p;
      k = i;
    }
  }
  return {finite_desc[k - sentinels - 1], k, c.fraction().times(n),
          n - first + 1};
}

}  // namespace detail

// c-guarded empirical revenue maximization: among indices i > c*N of the
// non-increasing samples, pick the largest maximizer of i * v_i and post its
// value as the price.
inline ErmOutcome guarded_erm(const SampleVector& samples, const Guard& c) {
  return detail::erm_kernel(samples.finite(), samples.sentinel_top(), c);
}

// Runs guarded ERM on v_minus with m "+infinity" samples on top. Requires
// c >= m/N with N = |v_minus| + m, so no sentinel can be selected.
inline ErmOutcome erm_with_sentinels(const SampleVector& v_minus,
                                     std::size_t m, const Guard& c) {
  const std::size_t n = v_minus.size() + m;
  if (!c.covers(v_minus.sentinel_top() + m, n)) {
    fail(ErrorKind::kPreconditionC,
         "c = " + std::to_string(c.value()) + " < m/N = " +
             std::to_string(m) + "/" + std::to_string(n));
  }
  return guarded_erm(v_minus.with_sentinels(m), c);
}

// The event k* <= d*n (exact comparison).
inline bool small_index_event(const ErmOutcome& outcome, double d,
                              std::size_t n) {
  require(d > 0.0 && d < 1.0, "small_index_event requires 0 < d < 1");
  return Fraction(d).compare_index(outcome.k_star, n) <= 0;
}

}  // namespace iam
