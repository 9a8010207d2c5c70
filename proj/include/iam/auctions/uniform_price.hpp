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

// Digital-goods uniform-price auction: the seller posts p = ERM^c(bids) and
// every bidder with bid >= p gets a copy at price p. A coalition of the
// m_group highest-valued bidders may replace its bids by one common bid.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "iam/auctions/vickrey.hpp"
#include "iam/bestresponse.hpp"
#include "iam/distributions.hpp"
#include "iam/erm.hpp"
#include "iam/errors.hpp"
#include "iam/montecarlo.hpp"

namespace iam {

// Positions of the bidders served at price p.
inline std::vector<std::size_t> uniform_price_winners(std::span<const double> bids, double p) {
  std::vector<std::size_t> w;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    if (bids[i] >= p) w.push_back(i);
  }
  return w;
}

// Utility of a truthful bidder with value v at posted price p.
inline double posted_price_utility(double v, double p) { return v >= p ? v - p : 0.0; }

// c = 1/n for a single deviator. A coalition of m > 1 needs c >= m/n, so it
// runs with c = m/n instead; `substituted` records that.
struct UniformPriceGuard {
  Guard c;
  bool substituted = false;
};

inline UniformPriceGuard uniform_price_guard(std::size_t n, std::size_t m_group) {
  require(n >= 2 && m_group >= 1 && m_group < n, "need n >= 2 and 1 <= m_group < n");
  if (m_group == 1) return {Guard::ratio(1, n), false};
  return {Guard::ratio(m_group, n), true};
}

struct GroupDeviationOutcome {
  std::size_t n = 0;
  std::size_t m_group = 0;
  double price_truthful = 0.0;
  double price_deviated = 0.0;
  std::vector<double> member_gains;  // per coalition member, highest value first

  double per_member_gain() const {
    return member_gains.empty() ? 0.0 : ordered_sum(member_gains) /
                                             static_cast<double>(member_gains.size());
  }
  double max_member_gain() const {
    return *std::max_element(member_gains.begin(), member_gains.end());
  }
};

// One auction on the given values.
inline GroupDeviationOutcome group_deviation(std::vector<double> values, std::size_t m_group) {
  const std::size_t n = values.size();
  const auto guard = uniform_price_guard(n, m_group);
  std::sort(values.begin(), values.end(), std::greater<>());
  GroupDeviationOutcome o;
  o.n = n;
  o.m_group = m_group;
  o.price_truthful = guarded_erm(SampleVector::from_sorted(values), guard.c).price;
  const std::vector<double> members(values.begin(), values.begin() + static_cast<long>(m_group));
  const auto rest = SampleVector::from_sorted(
      std::vector<double>(values.begin() + static_cast<long>(m_group), values.end()));
  const auto br = min_manipulated_price(rest, m_group, guard.c);
  o.price_deviated = std::min(br.price, o.price_truthful);
  for (double v : members) {
    o.member_gains.push_back(utility_change(v, v >= o.price_deviated, o.price_deviated,
                                            v >= o.price_truthful, o.price_truthful));
  }
  return o;
}

struct UniformPriceReport {
  EstimateReport gain;        // per-member gain
  EstimateReport price_drop;  // p_truthful - p_deviated
  double max_excess = 0.0;    // max over replications and members of gain - drop
  bool c_substituted = false;
  double c = 0.0;
};

inline UniformPriceReport run_uniform_price(const DistributionSpec& dist, std::size_t n,
                                            std::size_t m_group, std::size_t reps,
                                            std::uint64_t seed, std::size_t workers = 0) {
  require(reps >= 1, "reps must be >= 1");
  const auto guard = uniform_price_guard(n, m_group);
  std::vector<double> drop(reps), excess(reps);
  const auto gain = run_replications(
      reps, seed,
      [&](RandomStream& s, std::size_t r) {
        const auto o = group_deviation(sample(dist, s, n), m_group);
        drop[r] = o.price_truthful - o.price_deviated;
        excess[r] = o.max_member_gain() - drop[r];
        return o.per_member_gain();
      },
      workers);
  UniformPriceReport out;
  out.c = guard.c.value();
  out.c_substituted = guard.substituted;
  out.gain = summarize(gain, seed, n, m_group, out.c);
  out.price_drop = summarize(drop, seed, n, m_group, out.c);
  out.max_excess = *std::max_element(excess.begin(), excess.end());
  return out;
}

}  // namespace iam
