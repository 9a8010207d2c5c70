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

// Two-phase repeated auctions. Phase 1 runs T1 second-price auctions without
// reserve and learns a reserve by guarded ERM on all T1*K1 bids; phase 2 runs
// T2 (k-unit) Vickrey auctions with that reserve. One designated bidder takes
// part in m1 phase-1 and m2 phase-2 auctions. When she deviates, she shades
// her phase-1 bids to the identical bid that minimizes the learned reserve
// and bids truthfully in phase 2.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iam/auctions/revenue.hpp"
#include "iam/auctions/vickrey.hpp"
#include "iam/bestresponse.hpp"
#include "iam/distributions.hpp"
#include "iam/erm.hpp"
#include "iam/errors.hpp"
#include "iam/montecarlo.hpp"

namespace iam {

struct TwoPhaseConfig {
  DistributionSpec dist = DistributionSpec::two_point(2.0);
  std::size_t t1 = 32, t2 = 32;  // auctions per phase
  std::size_t k1 = 2, k2 = 2;    // bidders per auction
  std::size_t m1 = 1, m2 = 1;    // the deviator's participation per phase
  Guard c = Guard::ratio(1, 64);
  std::size_t units = 1;         // units sold per phase-2 auction

  std::size_t phase1_bids() const { return t1 * k1; }

  void validate() const {
    require(t1 >= 1 && k1 >= 1 && k2 >= 1, "need T1, K1, K2 >= 1");
    require(m1 >= 1 && m1 <= t1, "need 1 <= m1 <= T1");
    require(m2 <= t2, "need m2 <= T2");
    require(units >= 1 && units <= k2, "need 1 <= units <= K2");
    require(phase1_bids() > m1, "phase 1 needs bids from someone besides the deviator");
    if (!c.covers(m1, phase1_bids())) {
      fail(ErrorKind::kPreconditionC, "c = " + format_number(c.value()) + " < m1/(T1*K1) = " +
                                          std::to_string(m1) + "/" +
                                          std::to_string(phase1_bids()));
    }
  }
};

// The deviator's seat in one auction.
struct Seat {
  double value = 0.0;
  bool won = false;
  double price = 0.0;

  double utility() const { return won ? value - price : 0.0; }
};

// One side (truthful or deviating) of a simulated run.
struct TwoPhaseSide {
  double reserve = 0.0;
  std::vector<Seat> phase1;  // the deviator's auctions, in draw order
  std::vector<Seat> phase2;
  double revenue_phase1 = 0.0;
  double revenue_phase2 = 0.0;

  static double total(const std::vector<Seat>& seats) {
    double u = 0.0;
    for (const auto& s : seats) u += s.utility();
    return u;
  }
  double phase1_utility() const { return total(phase1); }
  double phase2_utility() const { return total(phase2); }
  double total_utility() const { return phase1_utility() + phase2_utility(); }
};

struct TwoPhaseOutcome {
  double reserve_truthful = 0.0;
  double reserve_deviated = 0.0;
  double price_drop = 0.0;
  double deviation_gain_realized = 0.0;
  double deviation_gain_bound = 0.0;  // m2 * (p_truthful - p_deviated)
  double revenue_phase1 = 0.0;        // of the side that was asked for
  double revenue_phase2 = 0.0;
  std::optional<double> myerson_benchmark;  // T1 Mye^K1 + T2 Mye^K2
};

namespace detail {

// The draws of one replication, shared by both sides.
struct TwoPhaseDraws {
  std::vector<double> values1;                 // T1*K1, auction-major
  std::vector<std::uint64_t> prio1;
  std::vector<std::size_t> deviator_auctions1;  // she is bidder 0 there
  std::vector<double> values2;
  std::vector<std::uint64_t> prio2;
  std::vector<std::size_t> deviator_auctions2;
};

inline TwoPhaseDraws draw_two_phase(const TwoPhaseConfig& cfg, RandomStream& s) {
  TwoPhaseDraws d;
  d.values1 = sample(cfg.dist, s, cfg.t1 * cfg.k1);
  d.prio1 = draw_priorities(s, cfg.t1 * cfg.k1);
  d.deviator_auctions1 = choose_distinct(s, cfg.t1, cfg.m1);
  d.values2 = sample(cfg.dist, s, cfg.t2 * cfg.k2);
  d.prio2 = draw_priorities(s, cfg.t2 * cfg.k2);
  d.deviator_auctions2 = choose_distinct(s, cfg.t2, cfg.m2);
  return d;
}

inline TwoPhaseSide play(const TwoPhaseConfig& cfg, const TwoPhaseDraws& d, bool deviate) {
  const std::size_t k1 = cfg.k1, k2 = cfg.k2;
  std::vector<double> bids1 = d.values1;
  if (deviate) {
    std::vector<double> own, others;
    std::vector<bool> is_own(bids1.size(), false);
    for (std::size_t a : d.deviator_auctions1) is_own[a * k1] = true;
    for (std::size_t i = 0; i < bids1.size(); ++i) {
      (is_own[i] ? own : others).push_back(bids1[i]);
    }
    const auto r = incentive_awareness(own, SampleVector::from_values(others), cfg.c);
    if (r.best_bid) {
      for (std::size_t a : d.deviator_auctions1) bids1[a * k1] = *r.best_bid;
    }
  }

  TwoPhaseSide side;
  std::vector<AuctionResult> res1(cfg.t1);
  for (std::size_t a = 0; a < cfg.t1; ++a) {
    const std::span<const double> b(bids1.data() + a * k1, k1);
    const std::span<const std::uint64_t> pr(d.prio1.data() + a * k1, k1);
    res1[a] = vickrey_auction(b, pr, 1, 0.0);
    side.revenue_phase1 += res1[a].revenue();
  }
  for (std::size_t a : d.deviator_auctions1) {
    side.phase1.push_back({d.values1[a * k1], res1[a].won(0), res1[a].price});
  }
  side.reserve = guarded_erm(SampleVector::from_values(bids1), cfg.c).price;

  std::vector<AuctionResult> res2(cfg.t2);
  for (std::size_t a = 0; a < cfg.t2; ++a) {
    const std::span<const double> b(d.values2.data() + a * k2, k2);
    const std::span<const std::uint64_t> pr(d.prio2.data() + a * k2, k2);
    res2[a] = vickrey_auction(b, pr, cfg.units, side.reserve);
    side.revenue_phase2 += res2[a].revenue();
  }
  for (std::size_t a : d.deviator_auctions2) {
    side.phase2.push_back({d.values2[a * k2], res2[a].won(0), res2[a].price});
  }
  return side;
}

inline TwoPhaseOutcome pair_outcome(const TwoPhaseSide& truthful, const TwoPhaseSide& deviated) {
  TwoPhaseOutcome o;
  o.reserve_truthful = truthful.reserve;
  o.reserve_deviated = deviated.reserve;
  o.price_drop = truthful.reserve - deviated.reserve;
  // Seat by seat, so that rounding cannot push the realized gain over the
  // bound: each phase-2 term is at most price_drop, and the bound is the
  // same number of price_drop terms summed in the same order.
  double phase1 = 0.0;
  for (std::size_t i = 0; i < truthful.phase1.size(); ++i) {
    const Seat& t = truthful.phase1[i];
    const Seat& v = deviated.phase1[i];
    phase1 += utility_change(t.value, v.won, v.price, t.won, t.price);
  }
  double phase2 = 0.0, bound = 0.0;
  for (std::size_t i = 0; i < truthful.phase2.size(); ++i) {
    const Seat& t = truthful.phase2[i];
    const Seat& v = deviated.phase2[i];
    phase2 += utility_change(t.value, v.won, v.price, t.won, t.price);
    bound += o.price_drop;
  }
  o.deviation_gain_realized = phase1 + phase2;
  o.deviation_gain_bound = bound;  // m2 * price_drop
  return o;
}

}  // namespace detail

// Both sides of one replication on identical draws.
struct TwoPhasePair {
  TwoPhaseSide truthful;
  TwoPhaseSide deviated;
  TwoPhaseOutcome outcome;
};

inline TwoPhasePair simulate_two_phase(const TwoPhaseConfig& cfg, RandomStream& s) {
  cfg.validate();
  const auto d = detail::draw_two_phase(cfg, s);
  TwoPhasePair p{detail::play(cfg, d, false), detail::play(cfg, d, true), {}};
  p.outcome = detail::pair_outcome(p.truthful, p.deviated);
  return p;
}

// rev* = T1 Mye^{K1} + T2 Mye^{K2, units}; empty when the family has no
// attained optimal reserve.
inline std::optional<double> two_phase_benchmark(const TwoPhaseConfig& cfg, std::size_t reps,
                                                 std::uint64_t seed) {
  if (!optimal_reserve(cfg.dist).attained) return std::nullopt;
  const double m1 = myerson_revenue(cfg.dist, cfg.k1, 1, reps, derive_seed(seed, 1)).mean;
  const double m2 =
      myerson_revenue(cfg.dist, cfg.k2, cfg.units, reps, derive_seed(seed, 2)).mean;
  return static_cast<double>(cfg.t1) * m1 + static_cast<double>(cfg.t2) * m2;
}

// A single run. Both sides are simulated on the same draws so that the
// deviation gain and the reserve drop are reported either way; revenues are
// those of the requested side.
inline TwoPhaseOutcome run_two_phase(const TwoPhaseConfig& cfg, bool deviate,
                                     std::uint64_t seed, std::size_t benchmark_reps = 20000) {
  RandomStream s(seed, 0);
  const auto p = simulate_two_phase(cfg, s);
  TwoPhaseOutcome o = p.outcome;
  const TwoPhaseSide& side = deviate ? p.deviated : p.truthful;
  o.revenue_phase1 = side.revenue_phase1;
  o.revenue_phase2 = side.revenue_phase2;
  if (benchmark_reps > 0) o.myerson_benchmark = two_phase_benchmark(cfg, benchmark_reps, seed);
  return o;
}

struct DeviationGainReport {
  EstimateReport realized;
  EstimateReport bound;
  // Largest realized - bound over all replications; <= 0 when the bound held
  // everywhere.
  double max_excess = 0.0;
  std::size_t reserve_increases = 0;  // replications with p_deviated > p_truthful
  std::optional<EstimateReport> revenue_ratio;  // truthful (rev1 + rev2) / rev*
};

inline DeviationGainReport estimate_deviation_gain(const TwoPhaseConfig& cfg, std::size_t reps,
                                                   std::uint64_t seed,
                                                   std::size_t workers = 0,
                                                   std::size_t benchmark_reps = 20000) {
  cfg.validate();
  require(reps >= 1, "reps must be >= 1");
  std::vector<double> bound(reps), revenue(reps), drop(reps);
  const auto realized = run_replications(
      reps, seed,
      [&](RandomStream& s, std::size_t r) {
        const auto p = simulate_two_phase(cfg, s);
        bound[r] = p.outcome.deviation_gain_bound;
        drop[r] = p.outcome.price_drop;
        revenue[r] = p.truthful.revenue_phase1 + p.truthful.revenue_phase2;
        return p.outcome.deviation_gain_realized;
      },
      workers);
  const std::size_t n = cfg.phase1_bids();
  DeviationGainReport out;
  out.realized = summarize(realized, seed, n, cfg.m1, cfg.c.value());
  out.bound = summarize(bound, seed, n, cfg.m1, cfg.c.value());
  out.max_excess = -kInf;
  for (std::size_t r = 0; r < reps; ++r) {
    out.max_excess = std::max(out.max_excess, realized[r] - bound[r]);
    if (drop[r] < 0.0) ++out.reserve_increases;
  }
  if (benchmark_reps > 0) {
    if (const auto rev_star = two_phase_benchmark(cfg, benchmark_reps, seed)) {
      for (auto& x : revenue) x /= *rev_star;
      out.revenue_ratio = summarize(revenue, seed, n, cfg.m1, cfg.c.value());
    }
  }
  return out;
}

}  // namespace iam
