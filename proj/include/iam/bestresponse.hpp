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

// Minimum reserve a manipulator controlling m of the N samples can force on
// guarded ERM, and the incentive-awareness measures built on it.
//
// Why a finite candidate set suffices. It is enough to consider m identical
// bids b (any minimizing bid vector can be flattened to its price without
// changing the outcome). Put the block of m bids in "slot" s, between the
// true samples w_s >= b >= w_{s+1}. Inside a slot every true sample keeps its
// merged index, so the products of the true samples are constants: let M(s)
// be their eligible maximum. The block's best product (s+m)*b grows with b,
// so the price is the constant winner value while the block loses and b
// itself once it wins. The per-slot minimum is therefore reached either at
// the bottom of the slot (b = w_{s+1}) or at the smallest winning bid
// b_min(s) ~ M(s)/(s+m). The candidates are {0} u {w_j} u {b_min(s)}.
//
// Two implementations are provided: kEnumerate evaluates every candidate with
// a full guarded ERM pass (O(N^2)); kSweep derives every M(s) from prefix and
// suffix maxima in one pass (O(N)) and is the default. They are tested
// against each other and against a dense-grid brute force.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iam/erm.hpp"
#include "iam/errors.hpp"
#include "iam/fraction.hpp"

namespace iam {

enum class BestResponseMethod { kEnumerate, kSweep };

struct BestResponse {
  double price = 0.0;  // min over b of ERM(b x m, v_minus)
  double bid = 0.0;    // an identical bid attaining it
  // c >= m/N. Not required here, but the worst-case reductions need it.
  bool guard_covers_m = false;
};

struct ManipulationResult {
  double min_price = 0.0;
  // Attaining bid; empty when the truthful price is already minimal.
  std::optional<double> best_bid;
  double baseline_price = 0.0;
  double delta = 0.0;  // 1 - min_price / baseline_price
};

namespace detail {

// Merges m copies of b into the non-increasing w and runs guarded ERM.
// `scratch` is reused between calls.
inline ErmOutcome erm_with_block(std::span<const double> w, std::size_t m,
                                 double b, const Guard& c,
                                 std::vector<double>& scratch) {
  scratch.clear();
  scratch.reserve(w.size() + m);
  const auto pos = std::upper_bound(w.begin(), w.end(), b, std::greater<>());
  scratch.insert(scratch.end(), w.begin(), pos);
  scratch.insert(scratch.end(), m, b);
  scratch.insert(scratch.end(), pos, w.end());
  return erm_kernel(scratch, 0, c);
}

inline void check_inputs(const SampleVector& v_minus, std::size_t m) {
  require(m >= 1, "manipulation needs m >= 1");
  require(v_minus.sentinel_top() == 0 && !v_minus.empty(),
          "v_minus must be non-empty and finite");
}

// Among bids reaching `price`, prefer the price itself (the bid is then its
// own ERM outcome); otherwise keep `fallback`.
inline double pick_bid(std::span<const double> w, std::size_t m, double price,
                       double fallback, const Guard& c,
                       std::vector<double>& scratch) {
  if (erm_with_block(w, m, price, c, scratch).price == price) return price;
  return fallback;
}

inline BestResponse enumerate(std::span<const double> w, std::size_t m,
                              const Guard& c) {
  const std::size_t n = w.size();
  const std::size_t total = n + m;
  const std::size_t first = c.first_eligible(total);

  std::vector<double> candidates{0.0};
  candidates.insert(candidates.end(), w.begin(), w.end());
  for (std::size_t s = 0; s <= n; ++s) {
    const std::size_t block = s + m;
    if (block < first) continue;
    // Max eligible product of the true samples with the block in slot s.
    long double best = -1.0L;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t idx = j <= s ? j : j + m;
      if (idx >= first) best = std::max(best, index_product(idx, w[j - 1]));
    }
    if (best < 0.0L) continue;
    const double t = static_cast<double>(best / static_cast<long double>(block));
    // Neighbours absorb the rounding of the division and strict ties.
    double x = std::nextafter(t, 0.0);
    for (int k = 0; k < 4; ++k) {
      candidates.push_back(x);
      x = std::nextafter(x, std::numeric_limits<double>::infinity());
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  std::vector<double> scratch;
  BestResponse out;
  out.price = std::numeric_limits<double>::infinity();
  for (double b : candidates) {
    if (b < 0.0) continue;
    const double p = erm_with_block(w, m, b, c, scratch).price;
    if (p < out.price) {
      out.price = p;
      out.bid = b;
    }
  }
  out.bid = pick_bid(w, m, out.price, out.bid, c, scratch);
  return out;
}

struct SlotMax {
  long double product = -1.0L;
  std::size_t index = 0;  // merged index, 0 = none eligible
  double value = 0.0;
};

inline BestResponse sweep(std::span<const double> w, std::size_t m,
                          const Guard& c) {
  const std::size_t n = w.size();
  const std::size_t total = n + m;
  const std::size_t first = c.first_eligible(total);

  // prefix[s]: best of j <= s (merged index j); suffix[s]: best of j > s
  // (merged index j + m). Ties keep the larger merged index.
  std::vector<SlotMax> prefix(n + 1), suffix(n + 1);
  for (std::size_t s = 1; s <= n; ++s) {
    prefix[s] = prefix[s - 1];
    if (s >= first) {
      const long double p = index_product(s, w[s - 1]);
      if (p >= prefix[s].product) prefix[s] = {p, s, w[s - 1]};
    }
  }
  for (std::size_t s = n; s-- > 0;) {
    suffix[s] = suffix[s + 1];
    const std::size_t idx = s + 1 + m;
    if (idx >= first) {
      const long double p = index_product(idx, w[s]);
      if (p > suffix[s].product) suffix[s] = {p, idx, w[s]};
    }
  }

  const double inf = std::numeric_limits<double>::infinity();
  BestResponse out;
  out.price = inf;
  auto consider = [&](double price, double bid) {
    if (price < out.price || (price == out.price && bid < out.bid)) {
      out.price = price;
      out.bid = bid;
    }
  };

  for (std::size_t s = 0; s <= n; ++s) {
    const SlotMax& pre = prefix[s];
    const SlotMax& suf = suffix[s];
    const SlotMax& win =
        (suf.index != 0 && suf.product >= pre.product) ? suf : pre;
    const std::size_t block = s + m;
    const bool block_eligible = block >= first;
    const double lo = s == n ? 0.0 : w[s];
    const double hi = s == 0 ? inf : w[s - 1];

    auto block_wins = [&](double b) {
      if (!block_eligible) return false;
      if (win.index == 0) return true;
      const long double p = index_product(block, b);
      return p > win.product || (p == win.product && block > win.index);
    };

    if (!block_wins(lo)) {
      consider(win.value, lo);
      if (!block_eligible) continue;
      double t = std::max(
          lo, static_cast<double>(win.product / static_cast<long double>(block)));
      while (!block_wins(t)) t = std::nextafter(t, inf);
      for (double down = std::nextafter(t, 0.0); down > lo && block_wins(down);
           down = std::nextafter(t, 0.0)) {
        t = down;
      }
      if (t <= hi) consider(t, t);
    } else {
      consider(lo, lo);
    }
  }
  std::vector<double> scratch;
  out.bid = pick_bid(w, m, out.price, out.bid, c, scratch);
  return out;
}

}  // namespace detail

// min over b >= 0 of guarded_erm((b x m) u v_minus, c), attained exactly.
inline BestResponse min_manipulated_price(
    const SampleVector& v_minus, std::size_t m, const Guard& c,
    BestResponseMethod method = BestResponseMethod::kSweep) {
  detail::check_inputs(v_minus, m);
  const auto w = v_minus.finite();
  BestResponse out = method == BestResponseMethod::kSweep
                         ? detail::sweep(w, m, c)
                         : detail::enumerate(w, m, c);
  out.guard_covers_m = c.covers(m, w.size() + m);
  std::vector<double> scratch;
  if (detail::erm_with_block(w, m, out.bid, c, scratch).price != out.price) {
    // The candidate argument guarantees attainment; a miss is a bug.
    throw std::logic_error("best response not attained at reported bid");
  }
  return out;
}

// Testing oracle: min over the given bids only.
inline double min_manipulated_price_bruteforce(const SampleVector& v_minus,
                                               std::size_t m, const Guard& c,
                                               std::span<const double> grid) {
  detail::check_inputs(v_minus, m);
  require(!grid.empty(), "bruteforce grid must be non-empty");
  std::vector<double> scratch;
  double best = std::numeric_limits<double>::infinity();
  for (double b : grid) {
    require(b >= 0.0 && std::isfinite(b), "bids must be finite and >= 0");
    best = std::min(best,
                    detail::erm_with_block(v_minus.finite(), m, b, c, scratch).price);
  }
  return best;
}

// delta_I(v_I, v_minus) = 1 - inf_b P(b, v_minus) / P(v_I, v_minus).
inline ManipulationResult incentive_awareness(
    std::span<const double> v_I, const SampleVector& v_minus, const Guard& c,
    BestResponseMethod method = BestResponseMethod::kSweep) {
  const std::size_t m = v_I.size();
  detail::check_inputs(v_minus, m);
  std::vector<double> all(v_minus.finite().begin(), v_minus.finite().end());
  all.insert(all.end(), v_I.begin(), v_I.end());
  const double baseline = guarded_erm(SampleVector::from_values(std::move(all)), c).price;
  if (baseline == 0.0) {
    fail(ErrorKind::kDegeneratePrice, "truthful price is 0, delta undefined");
  }
  const BestResponse br = min_manipulated_price(v_minus, m, c, method);
  if (br.price > baseline) {
    throw std::logic_error("manipulated price exceeds truthful price");
  }
  ManipulationResult r;
  r.min_price = br.price;
  r.baseline_price = baseline;
  r.delta = 1.0 - br.price / baseline;
  if (br.price < baseline) r.best_bid = br.bid;
  return r;
}

// delta^worst_m(v_minus): the manipulator's own samples set to max(v_minus),
// which is the supremum over v_I when c >= m/N.
inline ManipulationResult worst_case_delta(
    const SampleVector& v_minus, std::size_t m, const Guard& c,
    BestResponseMethod method = BestResponseMethod::kSweep) {
  detail::check_inputs(v_minus, m);
  const std::size_t n = v_minus.size() + m;
  if (!c.covers(m, n)) {
    fail(ErrorKind::kPreconditionC, "c = " + std::to_string(c.value()) +
                                        " < m/N = " + std::to_string(m) + "/" +
                                        std::to_string(n));
  }
  const std::vector<double> top(m, v_minus.max_finite());
  return incentive_awareness(top, v_minus, c, method);
}

}  // namespace iam
