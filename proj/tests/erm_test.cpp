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

#include "iam/erm.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"

namespace iam {
namespace {

ErmOutcome erm(std::vector<double> v, const Guard& c) {
  return guarded_erm(SampleVector::from_values(std::move(v)), c);
}

TEST(GuardedErmTest, Examples) {
  auto a = erm({2, 1}, 0.0);
  EXPECT_EQ(a.k_star, 2u);
  EXPECT_EQ(a.price, 1.0);

  auto b = erm({10, 6, 4, 1}, 0.25);
  EXPECT_EQ(b.k_star, 3u);
  EXPECT_EQ(b.price, 4.0);
  EXPECT_EQ(b.eligible_count, 3u);
  EXPECT_EQ(b.threshold, 1.0);

  auto c = erm({5}, 0.0);
  EXPECT_EQ(c.k_star, 1u);
  EXPECT_EQ(c.price, 5.0);
}

TEST(GuardedErmTest, TiesGoToLargerIndex) {
  // 1*4 = 2*2 = 4*1.
  auto r = erm({4, 2, 1, 1}, 0.0);
  EXPECT_EQ(r.k_star, 4u);
  EXPECT_EQ(r.price, 1.0);
  auto all_equal = erm({3, 3, 3}, 0.0);
  EXPECT_EQ(all_equal.k_star, 3u);
}

TEST(GuardedErmTest, GuardBoundaryIsStrict) {
  // c*N = 1 exactly, so index 1 is not eligible even though 1*100 is largest.
  auto r = erm({100, 1, 1, 1}, 0.25);
  EXPECT_EQ(r.k_star, 4u);
  EXPECT_EQ(r.price, 1.0);
  // Just under 1/4: index 1 is eligible.
  auto s = erm({100, 1, 1, 1}, std::nextafter(0.25, 0.0));
  EXPECT_EQ(s.k_star, 1u);
  EXPECT_EQ(s.price, 100.0);
}

TEST(GuardedErmTest, ExactRationalGuard) {
  // (1/49) * 49 rounds below 1 in doubles; the exact guard keeps index 1 out.
  std::vector<double> v(49, 1.0);
  v[0] = 1000.0;
  auto r = guarded_erm(SampleVector::from_values(v), Guard::ratio(1, 49));
  EXPECT_EQ(r.k_star, 49u);
}

TEST(GuardedErmTest, Rejections) {
  EXPECT_THROW(erm({}, 0.0), Error);
  EXPECT_THROW(erm({1.0, -1.0}, 0.0), Error);
  EXPECT_THROW(erm({1.0, std::nan("")}, 0.0), Error);
  EXPECT_THROW(erm({1.0, kInf}, 0.0), Error);
  EXPECT_THROW(Guard(1.0), Error);
  EXPECT_THROW(Guard(-0.1), Error);
}

TEST(SentinelTest, Example) {
  auto r = erm_with_sentinels(SampleVector::from_values({4, 3, 1}), 1, 0.25);
  EXPECT_EQ(r.k_star, 3u);
  EXPECT_EQ(r.price, 3.0);
}

TEST(SentinelTest, NeverSelected) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t m = 1 + gen() % 4;
    const std::size_t free = 1 + gen() % 20;
    const std::size_t n = m + free;
    std::vector<double> v(free);
    for (auto& x : v) x = u(gen);
    auto r = erm_with_sentinels(SampleVector::from_values(v), m, Guard::ratio(m, n));
    EXPECT_GT(r.k_star, m);
    EXPECT_TRUE(std::isfinite(r.price));
  }
}

TEST(SentinelTest, PreconditionAndEligibility) {
  const auto v = SampleVector::from_values({4, 3, 1});
  try {
    erm_with_sentinels(v, 2, 0.25);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPreconditionC);
  }
  try {
    guarded_erm(v.with_sentinels(2), 0.25);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSentinelEligible);
  }
}

TEST(SmallIndexEventTest, ExactComparison) {
  ErmOutcome o;
  o.k_star = 25;
  EXPECT_TRUE(small_index_event(o, 0.25, 100));
  o.k_star = 26;
  EXPECT_FALSE(small_index_event(o, 0.25, 100));
  o.k_star = 10;
  EXPECT_TRUE(small_index_event(o, 0.1, 100));  // 0.1 is slightly above 1/10
  EXPECT_THROW(small_index_event(o, 0.0, 100), Error);
  EXPECT_THROW(small_index_event(o, 1.0, 100), Error);
}

TEST(SmallIndexEventTest, Examples) {
  ErmOutcome o;
  o.k_star = 3;
  EXPECT_FALSE(small_index_event(o, 0.5, 4));
  o.k_star = 1;
  EXPECT_TRUE(small_index_event(o, 0.5, 4));
  RandomStream s(9, 0);
  const auto d = DistributionSpec::two_point(4.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 4 + s.below(100);
    EXPECT_FALSE(small_index_event(guarded_erm(SampleVector::from_values(sample(d, s, n)), 0.0),
                                   0.25, n));
  }
}

TEST(SentinelTest, ZeroSentinelsAndAllEqual) {
  const auto v = SampleVector::from_values({7, 2, 2, 1});
  const auto a = erm_with_sentinels(v, 0, 0.0);
  const auto b = guarded_erm(v, 0.0);
  EXPECT_EQ(a.k_star, b.k_star);
  EXPECT_EQ(a.price, b.price);
  const auto r = erm_with_sentinels(SampleVector::from_values({1.5, 1.5, 1.5}), 1,
                                    Guard::ratio(1, 4));
  EXPECT_EQ(r.price, 1.5);
  EXPECT_EQ(r.k_star, 4u);
}

class ErmPropertyTest : public ::testing::TestWithParam<int> {};

TEST_P(ErmPropertyTest, MatchesDefinitionAndInvariants) {
  std::mt19937_64 gen(static_cast<unsigned>(GetParam()));
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + gen() % 30;
    std::vector<double> v(n);
    // Small integer values produce many ties.
    for (auto& x : v) x = static_cast<double>(gen() % 6);
    const double c = static_cast<double>(gen() % 8) / 10.0;
    const auto r = erm(v, c);
    ASSERT_EQ(r.k_star, testing::erm_index_by_definition(v, c));
    ASSERT_GT(static_cast<double>(r.k_star), c * static_cast<double>(n) - 1e-12);

    // Permutation invariance.
    std::shuffle(v.begin(), v.end(), gen);
    const auto p = erm(v, c);
    ASSERT_EQ(p.k_star, r.k_star);
    ASSERT_EQ(p.price, r.price);

    // Price lies in the range of values at eligible ranks.
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const std::size_t first = Guard(c).first_eligible(n);
    ASSERT_LE(r.price, sorted[first - 1]);
    ASSERT_GE(r.price, sorted.back());

  }
}

TEST_P(ErmPropertyTest, RaisingTopBidsNeverLowersPrice) {
  std::mt19937_64 gen(static_cast<unsigned>(GetParam()) + 100);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t m = 1 + gen() % 3;
    const std::size_t n = m + 1 + gen() % 25;
    std::vector<double> v(n);
    for (auto& x : v) x = (gen() % 2) ? std::floor(u(gen)) : u(gen);
    const Guard c = Guard::ratio(m + gen() % 3, n + 3);
    if (!c.covers(m, n)) continue;
    const double before = erm(v, c).price;
    std::shuffle(v.begin(), v.end(), gen);
    const double top = *std::max_element(v.begin() + static_cast<long>(m), v.end());
    for (std::size_t i = 0; i < m; ++i) v[i] = std::max(v[i], top + static_cast<double>(gen() % 3));
    ASSERT_GE(erm(v, c).price, before);
  }
}

TEST_P(ErmPropertyTest, AdjacentEqualValuesAreMultiset) {
  std::mt19937_64 gen(static_cast<unsigned>(GetParam()) + 200);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + gen() % 20;
    std::vector<double> v(n);
    for (auto& x : v) x = static_cast<double>(1 + gen() % 3);
    const double c = static_cast<double>(gen() % 5) / 10.0;
    const double p = erm(v, c).price;
    for (int k = 0; k < 5; ++k) {
      std::shuffle(v.begin(), v.end(), gen);
      ASSERT_EQ(erm(v, c).price, p);
      ASSERT_EQ(erm(v, c).k_star, erm(v, c).k_star);
    }
  }
}

TEST_P(ErmPropertyTest, BoundedSupportGuard) {
  RandomStream s(static_cast<std::uint64_t>(GetParam()), 0);
  for (const auto& [dist, high] :
       {std::pair{DistributionSpec::two_point(4.0), 4.0},
        std::pair{DistributionSpec::uniform(1.0, 3.0), 3.0}}) {
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 10 + s.below(200);
      const auto r = erm(sample(dist, s, n), Guard(1.0 / (2.0 * high)));
      ASSERT_GT(static_cast<double>(r.k_star), static_cast<double>(n) / high) << dist.name();
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, ErmPropertyTest, ::testing::Values(1, 2, 3, 4));

}  // namespace
}  // namespace iam
