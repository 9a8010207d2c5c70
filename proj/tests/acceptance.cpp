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

// Acceptance run: one PASS/FAIL line per criterion. Tolerances, sizes and
// time budgets are fixed below; exit status is 0 only if every line passes.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "iam/auctions/revenue.hpp"
#include "iam/auctions/two_phase.hpp"
#include "iam/bestresponse.hpp"
#include "iam/distributions.hpp"
#include "iam/erm.hpp"
#include "iam/montecarlo.hpp"
#include "iam/random.hpp"
#include "support/oracles.hpp"

namespace {

using namespace iam;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool ok = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& title, double budget_s,
               const std::function<Verdict()>& body) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("threw: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool ok = v.ok && in_time;
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << "  [" << id << "] " << title << ": " << v.detail
            << " (" << fmt(secs) << " s of " << fmt(budget_s) << " s"
            << (in_time ? "" : ", over budget") << ")" << std::endl;
}

// 1. Sweep and enumeration best responses against a dense-grid brute force.
Verdict oracle_equivalence() {
  constexpr int kInstances = 2000;
  constexpr int kGridPoints = 2000;
  const auto families = testing::all_families();
  RandomStream s(20260101, 0);
  int mismatches = 0;
  for (int t = 0; t < kInstances; ++t) {
    const auto inst = testing::random_instance(s, families);
    const auto fast =
        min_manipulated_price(inst.v_minus, inst.m, inst.c, BestResponseMethod::kSweep);
    const auto slow =
        min_manipulated_price(inst.v_minus, inst.m, inst.c, BestResponseMethod::kEnumerate);
    auto grid = testing::dense_grid(inst.v_minus, kGridPoints);
    grid.push_back(fast.bid);
    grid.push_back(slow.bid);
    const double brute = min_manipulated_price_bruteforce(inst.v_minus, inst.m, inst.c, grid);
    if (fast.price != brute || slow.price != brute ||
        testing::erm_at(inst.v_minus, inst.m, fast.bid, inst.c) != fast.price) {
      ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(kInstances) + " instances, " +
                               std::to_string(mismatches) + " mismatches (need 0)"};
}

// 2. Tie-break and guard examples, exact.
Verdict tie_break_examples() {
  const auto erm = [](std::vector<double> v, Guard c) {
    return guarded_erm(SampleVector::from_values(std::move(v)), c);
  };
  int bad = 0;
  const auto a = erm({2, 1}, 0.0);
  bad += !(a.k_star == 2 && a.price == 1.0);
  const auto b = erm({10, 6, 4, 1}, 0.25);
  bad += !(b.k_star == 3 && b.price == 4.0 && b.eligible_count == 3 && b.threshold == 1.0);
  const auto c = erm({5}, 0.0);
  bad += !(c.k_star == 1 && c.price == 5.0);
  const auto d = erm_with_sentinels(SampleVector::from_values({4, 3, 1}), 1, 0.25);
  bad += !(d.k_star == 3 && d.price == 3.0);
  // Equal products at k = 1, 2, 3, 4: the largest index wins.
  const auto e = erm({12, 6, 4, 3}, 0.0);
  bad += !(e.k_star == 4 && e.price == 3.0);
  return {bad == 0, "5 examples, " + std::to_string(bad) + " wrong"};
}

// 3. Bounded support [1, D]: k* <= N/D never happens.
Verdict bounded_support_guard() {
  constexpr std::size_t kDraws = 100000;
  constexpr std::size_t kN = 100;
  const std::array<Guard, 4> guards{Guard(0.0), Guard::ratio(1, kN), Guard::ratio(1, 8),
                                    Guard::ratio(1, 4)};
  std::size_t hits = 0;
  for (const auto& dist : {DistributionSpec::uniform(1.0, 2.0), DistributionSpec::two_point(2.0)}) {
    const auto h = run_replications(kDraws, 33, [&](RandomStream& s, std::size_t r) {
      const auto out = guarded_erm(SampleVector::from_values(sample(dist, s, kN)),
                                   guards[r % guards.size()]);
      return small_index_event(out, 0.5, kN) ? 1.0 : 0.0;
    });
    hits += static_cast<std::size_t>(ordered_sum(h));
  }
  return {hits == 0, "2 x " + std::to_string(kDraws) + " vectors at N=" + std::to_string(kN) +
                         ", c in {0, 1/N, 1/8, 1/4}: " + std::to_string(hits) +
                         " with k* <= N/2 (need 0)"};
}

// 4. For bounded families the worst-case delta does not depend on c in
// [m/N, 1/(2D)].
Verdict c_invariance() {
  constexpr int kInstances = 1000;
  constexpr int kCs = 5;
  RandomStream s(404, 0);
  const std::array<std::pair<DistributionSpec, double>, 3> families{
      std::pair{DistributionSpec::two_point(2.0), 2.0},
      std::pair{DistributionSpec::two_point(4.0), 4.0},
      std::pair{DistributionSpec::uniform(1.0, 2.0), 2.0}};
  int mismatches = 0;
  for (int t = 0; t < kInstances; ++t) {
    const auto& [dist, high] = families[s.below(families.size())];
    const std::size_t m = 1 + s.below(3);
    const std::size_t n = static_cast<std::size_t>(2 * high) * m + s.below(200);
    const auto v = SampleVector::from_values(sample(dist, s, n - m));
    const double base = worst_case_delta(v, m, Guard::ratio(m, n)).delta;
    const double lo = static_cast<double>(m) / static_cast<double>(n);
    const double hi = 1.0 / (2.0 * high);
    for (int k = 0; k < kCs; ++k) {
      const Guard c = k == 0 ? Guard::ratio(m, n)
                      : k == kCs - 1 ? Guard(hi)
                                     : Guard(lo + (hi - lo) * s.uniform());
      mismatches += worst_case_delta(v, m, c).delta != base;
    }
  }
  return {mismatches == 0, std::to_string(kInstances) + " instances x " + std::to_string(kCs) +
                               " values of c, " + std::to_string(mismatches) +
                               " differ from c = m/N (need 0)"};
}

// 5. Triangular, c(N) = (ln N / N)^(1/3) / 5: Pr[k* < 2cN] stays high.
Verdict triangular_event() {
  constexpr double kFloor = 0.75;
  const std::vector<std::size_t> ns{500, 1000, 2000};
  SweepOptions opt;
  opt.reps = 10000;
  opt.seed = 5;
  const auto rows = sweep(DistributionSpec::triangular(), ns, 1, CSchedule::cube_root_log(0.2),
                          Metric::event_prob(EventBound::two_c(), Comparison::kLess), opt);
  bool ok = true;
  std::string d = "reps 10000, need >= " + fmt(kFloor) + ":";
  for (const auto& r : rows) {
    ok = ok && r.report && r.report->mean >= kFloor;
    d += " N=" + std::to_string(r.n) + " " + (r.report ? fmt(r.report->mean) : r.error);
  }
  return {ok, d};
}

// 6. Equal revenue with c = 1/N: the worst-case delta does not vanish.
Verdict equal_revenue_nonconvergence() {
  constexpr double kFloor = 0.01;
  const std::vector<std::size_t> ns{1000, 10000};
  SweepOptions opt;
  opt.reps = 5000;
  opt.seed = 6;
  const auto rows = sweep(DistributionSpec::equal_revenue(), ns, 1, CSchedule::one_over_n(),
                          Metric::delta_worst(), opt);
  bool ok = true;
  std::string d = "reps 5000, need ci95_lo >= " + fmt(kFloor) + ":";
  for (const auto& r : rows) {
    ok = ok && r.report && r.report->ci95_lo >= kFloor;
    d += " N=" + std::to_string(r.n) + " " +
         (r.report ? fmt(r.report->mean) + " [lo " + fmt(r.report->ci95_lo) + "]" : r.error);
  }
  return {ok, d};
}

// 7. Equal revenue with the cube-root schedule: the estimate falls with N.
Verdict equal_revenue_convergence() {
  constexpr double kCCap = 0.4;
  const std::vector<std::size_t> ns{100, 400, 1600, 6400};
  SweepOptions opt;
  opt.reps = 4000;
  opt.seed = 7;
  const auto rows = sweep(DistributionSpec::equal_revenue(), ns, 1,
                          CSchedule::cube_root_log(0.2), Metric::delta_worst(), opt);
  bool ok = true;
  std::string d = "reps 4000:";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    ok = ok && r.report && r.c && *r.c < kCCap;
    if (!ok) return {false, "row N=" + std::to_string(r.n) + " failed or c >= 0.4 " + r.error};
    if (i > 0) ok = ok && r.report->mean < rows[i - 1].report->mean;
    d += " N=" + std::to_string(r.n) + " " + fmt(r.report->mean);
  }
  const double first = rows.front().report->mean;
  const double last = rows.back().report->mean;
  ok = ok && last < first / 2.0;
  return {ok, d + "; strictly decreasing and last < first/2"};
}

// 8. TwoPoint(2), c = m/N: delta * sqrt(N) stays of constant order.
Verdict two_point_lower_bound_scaling() {
  constexpr double kUpper = 3.0;
  constexpr double kLower = 0.3;
  const std::vector<std::size_t> ns{100, 400, 1600};
  SweepOptions opt;
  opt.reps = 20000;
  opt.seed = 8;
  const auto rows = sweep(DistributionSpec::two_point(2.0), ns, 1, CSchedule::m_over_n(),
                          Metric::delta_worst(), opt);
  std::vector<double> scaled;
  for (const auto& r : rows) {
    if (!r.report) return {false, "N=" + std::to_string(r.n) + ": " + r.error};
    scaled.push_back(r.report->mean * std::sqrt(static_cast<double>(r.n)));
  }
  bool ok = true;
  std::string d = "reps 20000, delta*sqrt(N) relative to N=100 in [0.3, 3]:";
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    const double rel = scaled[i] / scaled[0];
    ok = ok && rel <= kUpper && rel >= kLower;
    d += " N=" + std::to_string(ns[i]) + " " + fmt(scaled[i]) + " (x" + fmt(rel) + ")";
  }
  return {ok, d};
}

// 9. Monte Carlo against the exact expectation over all 2^7 outcomes.
Verdict exhaustive_agreement() {
  constexpr double kSigmas = 4.0;
  constexpr std::size_t kN = 8, kM = 1, kReps = 100000;
  const Guard c = Guard::ratio(kM, kN);
  const double exact = testing::exact_two_point_delta(2.0, kN, kM, c);
  const auto r = estimate_delta_worst(DistributionSpec::two_point(2.0), kN, kM, c, kReps, 9);
  const double z = std::abs(r.mean - exact) / r.std_error;
  return {z <= kSigmas, "exact " + fmt(exact) + ", estimate " + fmt(r.mean) + " +- " +
                            fmt(r.std_error) + ", |z| = " + fmt(z) + " (need <= 4)"};
}

// 10. Two-phase auctions: the deviator's gain is bounded by her price drop.
Verdict two_phase_epsilon() {
  constexpr double kSigmas = 3.0;
  constexpr std::size_t kReps = 10000;
  TwoPhaseConfig cfg;
  cfg.dist = DistributionSpec::two_point(2.0);
  cfg.t1 = 32;
  cfg.k1 = 2;
  cfg.t2 = 32;
  cfg.k2 = 2;
  cfg.m1 = 1;
  cfg.m2 = 1;
  cfg.c = Guard::ratio(1, 8);
  const auto g = estimate_deviation_gain(cfg, kReps, 10, 0, 0);
  const double high = 2.0;
  const auto delta = estimate_delta_worst(cfg.dist, cfg.phase1_bids(), cfg.m1, cfg.c, kReps,
                                          derive_seed(10, cfg.phase1_bids()));
  const double scale = static_cast<double>(cfg.m2) * high;
  const double rhs = scale * delta.mean;
  const double se = std::hypot(g.realized.std_error, scale * delta.std_error);
  const bool every = g.max_excess <= 0.0;
  const bool mean_ok = g.realized.mean <= rhs + kSigmas * se;
  return {every && mean_ok,
          "max(realized - m2*(p_truthful - p_deviated)) = " + fmt(g.max_excess) +
              " (need <= 0); mean gain " + fmt(g.realized.mean) + " vs m2*D*delta = " +
              fmt(rhs) + " + 3*" + fmt(se)};
}

// 11. A reserve that is 0.95-optimal for one bidder stays so with more
// bidders and units.
Verdict revenue_ratio_cells() {
  constexpr double kTarget = 0.95;
  constexpr double kSigmas = 3.0;
  constexpr std::size_t kReps = 1000000;
  // p > 1 with p e^{1-p} = 0.95, by bisection on the decreasing branch.
  double lo = 1.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::exp(1.0 - mid) > kTarget ? lo : hi) = mid;
  }
  const double p = hi;
  const auto dist = DistributionSpec::exponential(1.0);
  bool ok = true;
  std::string d = "p = " + fmt(p) + ":";
  for (std::size_t k_bidders : {2u, 3u}) {
    for (std::size_t units : {1u, 2u}) {
      const auto r = revenue_ratio_check(dist, p, k_bidders, units, kReps,
                                         derive_seed(11, 10 * k_bidders + units));
      const bool cell = r.ratio_multi.mean >= r.ratio_single - kSigmas * r.ratio_multi.std_error;
      ok = ok && cell;
      d += " K=" + std::to_string(k_bidders) + ",k=" + std::to_string(units) + " " +
           fmt(r.ratio_multi.mean) + " vs " + fmt(r.ratio_single) + (cell ? "" : " (low)");
    }
  }
  return {ok, d};
}

// 12. Sorted samples stay in their quantile band except with probability delta.
Verdict quantile_concentration() {
  constexpr double kDelta = 0.05;
  constexpr std::size_t kN = 2000, kM = 3, kTrials = 2000;
  const double sigma = std::sqrt(kDelta * (1.0 - kDelta) / kTrials);
  bool ok = true;
  std::string d = "need <= " + fmt(kDelta + 3.0 * sigma) + ":";
  for (const auto& dist :
       {DistributionSpec::uniform(1.0, 2.0), DistributionSpec::exponential(1.0),
        DistributionSpec::equal_revenue(), DistributionSpec::triangular(),
        DistributionSpec::alpha_pareto(0.5)}) {
    const auto r = quantile_concentration_failure(dist, kN, kM, kDelta, kTrials, 12);
    ok = ok && r.mean <= kDelta + 3.0 * sigma;
    d += " " + dist.name() + " " + fmt(r.mean);
  }
  return {ok, d};
}

std::string capture(const std::string& cmd) {
  std::string out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return out;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = ::pclose(pipe);
  if (status != 0) out += "\n<exit " + std::to_string(status) + ">";
  return out;
}

// 13. CSV bytes do not depend on the worker count.
Verdict determinism() {
  const std::vector<std::string> commands{
      "sweep --dist equal-revenue --n 100,400 --c-schedule cuberoot --reps 3000 --seed 13",
      "event --dist triangular --n 500,1000 --c-schedule cuberoot --bound 2c --reps 3000",
      "two-phase --dist two-point:D=2 --t1 32 --k1 2 --c 0.125 --reps 2000 --seed 13",
      "uniform --dist uniform:lo=1,hi=2 --n 200 --group 2 --reps 2000",
      "revenue-check --dist exp:rate=1 --target-ratio 0.95 --reps 20000",
  };
  int differing = 0;
  for (const auto& args : commands) {
    std::string reference;
    for (const char* workers : {"1", "2", "8"}) {
      const std::string text = capture(std::string("IAM_WORKERS=") + workers + " " +
                                       IAM_CLI_PATH + " " + args + " 2>/dev/null");
      if (text.find("distribution,n,m,c") != 0) return {false, "no CSV from: " + args};
      if (reference.empty()) {
        reference = text;
      } else if (text != reference) {
        ++differing;
      }
    }
  }
  return {differing == 0, std::to_string(commands.size()) +
                              " commands at IAM_WORKERS 1, 2, 8: " + std::to_string(differing) +
                              " outputs differ (need 0)"};
}

}  // namespace

int main() {
  criterion(1, "best-response oracle equivalence", 60, oracle_equivalence);
  criterion(2, "tie-break examples", 1, tie_break_examples);
  criterion(3, "bounded-support guard", 30, bounded_support_guard);
  criterion(4, "c-invariance on bounded support", 60, c_invariance);
  criterion(5, "triangular small-index event", 300, triangular_event);
  criterion(6, "equal-revenue non-convergence at c = 1/N", 600, equal_revenue_nonconvergence);
  criterion(7, "equal-revenue convergence at cube-root c", 600, equal_revenue_convergence);
  criterion(8, "two-point 1/sqrt(N) scaling", 600, two_point_lower_bound_scaling);
  criterion(9, "exhaustive-expectation agreement", 120, exhaustive_agreement);
  criterion(10, "two-phase deviation gain", 300, two_phase_epsilon);
  criterion(11, "multi-bidder revenue ratio", 600, revenue_ratio_cells);
  criterion(12, "quantile concentration", 120, quantile_concentration);
  criterion(13, "worker-count determinism", 120, determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
