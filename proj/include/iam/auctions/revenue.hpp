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
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "iam/auctions/vickrey.hpp"
#include "iam/distributions.hpp"
#include "iam/errors.hpp"
#include "iam/montecarlo.hpp"

namespace iam {

// Revenue of one K-bidder, `units`-unit Vickrey auction with reserve p on
// fresh draws.
inline double vickrey_revenue_once(const DistributionSpec& dist, std::size_t k_bidders,
                                   std::size_t units, double reserve, RandomStream& s) {
  const auto bids = sample(dist, s, k_bidders);
  const auto prio = draw_priorities(s, k_bidders);
  return vickrey_auction(bids, prio, units, reserve).revenue();
}

inline EstimateReport vickrey_revenue(const DistributionSpec& dist, std::size_t k_bidders,
                                      std::size_t units, double reserve, std::size_t reps,
                                      std::uint64_t seed, std::size_t workers = 0) {
  require(k_bidders >= 1 && units >= 1 && reps >= 1, "need K, units, reps >= 1");
  require(reserve >= 0.0 && std::isfinite(reserve), "reserve must be finite and >= 0");
  const auto xs = run_replications(
      reps, seed,
      [&](RandomStream& s, std::size_t) {
        return vickrey_revenue_once(dist, k_bidders, units, reserve, s);
      },
      workers);
  return summarize(xs, seed, k_bidders, units, 0.0);
}

inline OptimalReserve attained_reserve(const DistributionSpec& dist) {
  const auto r = optimal_reserve(dist);
  if (!r.attained) {
    fail(ErrorKind::kNoAttainedReserve,
         dist.name() + " has no revenue-maximizing reserve (R(q) has no attained maximum)");
  }
  return r;
}

// Mye^K: Vickrey with the optimal anonymous reserve v*. For K = 1 this is a
// posted price and equals R* exactly; the estimate is Monte Carlo regardless.
inline EstimateReport myerson_revenue(const DistributionSpec& dist, std::size_t k_bidders,
                                      std::size_t units, std::size_t reps, std::uint64_t seed,
                                      std::size_t workers = 0) {
  return vickrey_revenue(dist, k_bidders, units, attained_reserve(dist).v_star, reps, seed,
                         workers);
}

// x^{K,k}(q): probability that a bidder at quantile q is among the top k of K
// (no reserve), sum_{i<k} C(K-1, i) q^i (1-q)^(K-1-i).
inline double allocation_probability(std::size_t k_bidders, std::size_t units, double q) {
  require(k_bidders >= 1 && units >= 1, "need K, k >= 1");
  require(q >= 0.0 && q <= 1.0, "quantile must lie in [0, 1]");
  const std::size_t n = k_bidders - 1;
  double total = 0.0;
  double binom = 1.0;  // C(n, i)
  for (std::size_t i = 0; i < units && i <= n; ++i) {
    total += binom * std::pow(q, static_cast<double>(i)) *
             std::pow(1.0 - q, static_cast<double>(n - i));
    binom = binom * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return total;
}

// Win frequency of a bidder at quantile q against K - 1 random opponents in
// a k-unit auction without reserve; estimates x^{K,k}(q).
inline EstimateReport win_frequency(const DistributionSpec& dist, std::size_t k_bidders,
                                    std::size_t units, double q, std::size_t reps,
                                    std::uint64_t seed, std::size_t workers = 0) {
  const double v = dist.quantile(q);
  const auto hits = run_replications(
      reps, seed,
      [&](RandomStream& s, std::size_t) {
        std::vector<double> bids{v};
        const auto others = sample(dist, s, k_bidders - 1);
        bids.insert(bids.end(), others.begin(), others.end());
        const auto prio = draw_priorities(s, k_bidders);
        return vickrey_auction(bids, prio, units, 0.0).won(0) ? 1.0 : 0.0;
      },
      workers);
  return summarize_binomial(hits, seed, k_bidders, units, 0.0);
}

// Expected Vickrey revenue with reserve p in quantile space,
// K * integral_0^{q(p)} phi(v(q)) x^{K,k}(q) dq, for continuous families.
inline double vickrey_revenue_quadrature(const DistributionSpec& dist, std::size_t k_bidders,
                                         std::size_t units, double reserve) {
  require(!dist.has_atoms(), "quantile-space revenue needs a continuous distribution");
  const double q_top = dist.tail(reserve);
  if (q_top <= 0.0) return 0.0;
  auto integrand = [&](double q) {
    const auto phi = dist.virtual_value(dist.quantile(q));
    return *phi * allocation_probability(k_bidders, units, q);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  return static_cast<double>(k_bidders) * integrator.integrate(integrand, 0.0, q_top);
}

struct RevenueRatioReport {
  double ratio_single = 0.0;    // p Pr[X >= p] / R*, exact
  EstimateReport ratio_multi;   // Vickrey(p) / Vickrey(v*), paired draws
  EstimateReport revenue_at_p;
  EstimateReport revenue_optimal;
};

// Checks that a reserve that is (1 - eps)-optimal for one bidder stays
// (1 - eps)-optimal for K bidders and k units. Both auctions see the same
// draws; the ratio's standard error comes from the delta method.
inline RevenueRatioReport revenue_ratio_check(const DistributionSpec& dist, double p,
                                              std::size_t k_bidders, std::size_t units,
                                              std::size_t reps, std::uint64_t seed,
                                              std::size_t workers = 0) {
  require(p > 0.0 && std::isfinite(p), "reserve p must be positive");
  require(k_bidders >= 1 && units >= 1 && reps >= 2, "need K, k >= 1 and reps >= 2");
  const auto star = attained_reserve(dist);
  RevenueRatioReport out;
  out.ratio_single = p * dist.tail(p) / star.r_star;

  std::vector<double> at_star(reps);
  const auto at_p = run_replications(
      reps, seed,
      [&](RandomStream& s, std::size_t r) {
        const auto bids = sample(dist, s, k_bidders);
        const auto prio = draw_priorities(s, k_bidders);
        at_star[r] = vickrey_auction(bids, prio, units, star.v_star).revenue();
        return vickrey_auction(bids, prio, units, p).revenue();
      },
      workers);
  out.revenue_at_p = summarize(at_p, seed, k_bidders, units, 0.0);
  out.revenue_optimal = summarize(at_star, seed, k_bidders, units, 0.0);

  const double a = out.revenue_at_p.mean;
  const double b = out.revenue_optimal.mean;
  require(b > 0.0, "optimal-reserve revenue estimate is zero");
  const double ratio = a / b;
  std::vector<double> resid(reps);
  for (std::size_t r = 0; r < reps; ++r) resid[r] = at_p[r] - ratio * at_star[r];
  const auto rs = summarize(resid, seed, k_bidders, units, 0.0);
  // Var(a/b) ~ Var(a - R b) / b^2; rs.std_error is already divided by sqrt(reps).
  out.ratio_multi = finish_report(ratio, rs.std_error / b, reps, seed, k_bidders, units, 0.0);
  return out;
}

}  // namespace iam
