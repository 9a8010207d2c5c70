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
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "iam/errors.hpp"
#include "iam/random.hpp"

namespace iam {

struct AuctionResult {
  std::vector<std::size_t> winners;  // bidder positions, best first
  double price = 0.0;                // paid by every winner

  bool won(std::size_t bidder) const {
    return std::find(winners.begin(), winners.end(), bidder) != winners.end();
  }
  double revenue() const { return price * static_cast<double>(winners.size()); }
};

// k-unit Vickrey auction with an anonymous reserve. Bidders are ranked by bid,
// equal bids by ascending priority. The top `units` bidders with
// bid >= reserve win, and each pays max(reserve, (units+1)-th highest bid).
// units = 1 and reserve = 0 is the plain second-price auction; a single
// bidder faces a posted price.
inline AuctionResult vickrey_auction(std::span<const double> bids,
                                     std::span<const std::uint64_t> priority,
                                     std::size_t units, double reserve) {
  require(units >= 1, "an auction needs at least one unit");
  require(priority.size() == bids.size(), "one priority per bid");
  std::vector<std::size_t> order(bids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (bids[a] != bids[b]) return bids[a] > bids[b];
    return priority[a] < priority[b];
  });
  AuctionResult out;
  for (std::size_t r = 0; r < order.size() && r < units; ++r) {
    if (bids[order[r]] >= reserve) out.winners.push_back(order[r]);
  }
  const double next = order.size() > units ? bids[order[units]] : 0.0;
  out.price = std::max(reserve, next);
  return out;
}

// u(new) - u(old) for a bidder with value v who wins at price p_new and/or
// p_old. Computed case by case so that the difference never exceeds the
// price difference through cancellation.
inline double utility_change(double v, bool won_new, double p_new, bool won_old,
                             double p_old) {
  if (won_new && won_old) return p_old - p_new;
  if (won_new) return v - p_new;
  if (won_old) return -(v - p_old);
  return 0.0;
}

// Random tie-break priorities for `count` bidders.
inline std::vector<std::uint64_t> draw_priorities(RandomStream& stream, std::size_t count) {
  std::vector<std::uint64_t> p(count);
  for (auto& x : p) x = stream();
  return p;
}

// `count` distinct indices from [0, population), uniformly without
// replacement (partial Fisher-Yates), in draw order.
inline std::vector<std::size_t> choose_distinct(RandomStream& stream, std::size_t population,
                                                std::size_t count) {
  require(count <= population, "cannot choose more slots than exist");
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(stream.below(population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace iam
