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
#include <cstdint>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "iam/auctions/vickrey.hpp"
#include "iam/distributions.hpp"
#include "iam/errors.hpp"
#include "iam/montecarlo.hpp"

namespace iam {

// u^K(v, p): expected utility of a bidder with value v in a K-bidder
// second-price auction with reserve p against K - 1 i.i.d. opponents,
// E[(v - Z) 1[v > Z]] with Z = max(p, X_2, ..., X_K).
//
// Since Pr[Z <= y] = F(y)^(K-1) for y >= p, u = integral_p^v F(y)^(K-1) dy.
// The integral is split at the atoms of F and evaluated by adaptive
// Gauss-Kronrod.
inline double interim_utility(const DistributionSpec& dist, std::size_t k_bidders, double v,
                              double p) {
  require(k_bidders >= 1, "K must be >= 1");
  require(v >= 0.0 && p >= 0.0 && std::isfinite(v) && std::isfinite(p),
          "v and p must be finite and >= 0");
  if (v <= p) return 0.0;
  if (k_bidders == 1) return v - p;
  const double e = static_cast<double>(k_bidders - 1);
  auto integrand = [&](double y) { return std::pow(dist.cdf(y), e); };

  std::vector<double> cuts{p};
  for (double a : dist.atoms()) {
    if (a > p && a < v) cuts.push_back(a);
  }
  const double lo = dist.support_lo();
  if (lo > p && lo < v) cuts.push_back(lo);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(v);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, cuts[i], cuts[i + 1], 15, 1e-12);
  }
  return total;
}

// Monte Carlo estimate of the same quantity, one auction per replication.
inline EstimateReport interim_utility_mc(const DistributionSpec& dist, std::size_t k_bidders,
                                         double v, double p, std::size_t reps,
                                         std::uint64_t seed, std::size_t workers = 0) {
  require(k_bidders >= 1 && reps >= 1, "need K >= 1 and reps >= 1");
  const auto xs = run_replications(
      reps, seed,
      [&](RandomStream& s, std::size_t) {
        double z = p;
        for (std::size_t i = 1; i < k_bidders; ++i) z = std::max(z, draw(dist, s));
        return v > z ? v - z : 0.0;
      },
      workers);
  return summarize(xs, seed, k_bidders, 1, 0.0);
}

// Per-auction cap on the utility gained from a reserve drop p1 -> p2:
// u(v, p2) - u(v, p1) <= p1 - p2.
inline double lipschitz_gain_bound(double p2, double p1) {
  if (p2 > p1) {
    fail(ErrorKind::kReversedPrices,
         "p2 = " + format_number(p2) + " exceeds p1 = " + format_number(p1));
  }
  return p1 - p2;
}

}  // namespace iam
