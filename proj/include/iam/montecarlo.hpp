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
#include <atomic>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "iam/bestresponse.hpp"
#include "iam/distributions.hpp"
#include "iam/erm.hpp"
#include "iam/errors.hpp"
#include "iam/fraction.hpp"
#include "iam/random.hpp"

namespace iam {

// ---------------------------------------------------------------------------
// Replication runner

// Requested count if positive, else $IAM_WORKERS, else the hardware count.
inline std::size_t worker_count(std::size_t requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("IAM_WORKERS"); env != nullptr && *env) {
    char* end = nullptr;
    const unsigned long long w = std::strtoull(env, &end, 10);
    require(end != env && *end == '\0' && w > 0,
            "IAM_WORKERS must be a positive integer, got '" + std::string(env) + "'");
    return static_cast<std::size_t>(w);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(stream, r) for r in [0, reps), replication r on RandomStream(seed, r),
// and returns the results indexed by r. If any replication throws, the
// exception of the lowest failing r is rethrown, whatever the schedule.
template <class Fn>
std::vector<double> run_replications(std::size_t reps, std::uint64_t seed, Fn&& fn,
                                     std::size_t workers = 0) {
  std::vector<double> out(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1, std::memory_order_relaxed);
      if (r >= reps) return;
      try {
        RandomStream stream(seed, r);
        out[r] = fn(stream, r);
      } catch (...) {
        errors[r] = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  const std::size_t w = std::min(worker_count(workers), std::max<std::size_t>(reps, 1));
  if (w <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) {
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return out;
}

// Neumaier-compensated sum in index order.
inline double ordered_sum(std::span<const double> xs) noexcept {
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

// ---------------------------------------------------------------------------
// Reports

struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  double ci95_lo = 0.0;
  double ci95_hi = 0.0;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  double c = 0.0;
};

inline constexpr double kZ95 = 1.96;

inline EstimateReport finish_report(double mean, double std_error, std::size_t reps,
                                    std::uint64_t seed, std::size_t n, std::size_t m,
                                    double c) {
  return {mean, std_error, mean - kZ95 * std_error, mean + kZ95 * std_error,
          reps, seed, n, m, c};
}

// Mean and sample-sd / sqrt(reps) of per-replication values.
inline EstimateReport summarize(std::span<const double> xs, std::uint64_t seed,
                                std::size_t n, std::size_t m, double c) {
  require(!xs.empty(), "summarize needs at least one replication");
  const double k = static_cast<double>(xs.size());
  const double mean = ordered_sum(xs) / k;
  double se = 0.0;
  if (xs.size() > 1) {
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - mean) * (xs[i] - mean);
    se = std::sqrt(ordered_sum(sq) / (k - 1.0)) / std::sqrt(k);
  }
  return finish_report(mean, se, xs.size(), seed, n, m, c);
}

// Fraction of ones with the binomial standard error sqrt(p(1-p)/reps).
inline EstimateReport summarize_binomial(std::span<const double> hits, std::uint64_t seed,
                                         std::size_t n, std::size_t m, double c) {
  require(!hits.empty(), "summarize needs at least one replication");
  const double k = static_cast<double>(hits.size());
  const double p = ordered_sum(hits) / k;
  return finish_report(p, std::sqrt(p * (1.0 - p) / k), hits.size(), seed, n, m, c);
}

// ---------------------------------------------------------------------------
// c schedules

class CSchedule {
 public:
  enum class Kind { kConstant, kOneOverN, kMOverN, kCubeRootLog };

  static constexpr double kDefaultKappa = 0.2;

  static CSchedule constant(double c) {
    require(std::isfinite(c) && c >= 0.0 && c < 1.0, "constant c must lie in [0, 1)");
    return CSchedule(Kind::kConstant, c);
  }
  static CSchedule one_over_n() { return CSchedule(Kind::kOneOverN, 0.0); }
  static CSchedule m_over_n() { return CSchedule(Kind::kMOverN, 0.0); }
  static CSchedule cube_root_log(double kappa = kDefaultKappa) {
    require(std::isfinite(kappa) && kappa > 0.0, "kappa must be positive");
    return CSchedule(Kind::kCubeRootLog, kappa);
  }

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  // c(N); ratios are kept exact.
  Guard evaluate(std::size_t n, std::size_t m) const {
    require(n >= 1, "c schedule needs N >= 1");
    switch (kind_) {
      case Kind::kConstant:
        return Guard(param_);
      case Kind::kOneOverN:
        require(n >= 2, "one-over-n needs N >= 2");
        return Guard::ratio(1, n);
      case Kind::kMOverN:
        require(m < n, "m-over-n needs m < N");
        return Guard::ratio(m, n);
      case Kind::kCubeRootLog: {
        const double dn = static_cast<double>(n);
        const double c = param_ * std::cbrt(std::log(dn) / dn);
        require(c > 0.0 && c < 1.0, "cuberoot schedule gives c(" + std::to_string(n) +
                                        ") = " + format_number(c) + " outside (0, 1)");
        return Guard(c);
      }
    }
    throw std::logic_error("unknown schedule");
  }

  std::string name() const {
    switch (kind_) {
      case Kind::kConstant:
        return "constant:c=" + format_number(param_);
      case Kind::kOneOverN:
        return "one-over-n";
      case Kind::kMOverN:
        return "m-over-n";
      case Kind::kCubeRootLog:
        return "cuberoot:kappa=" + format_number(param_);
    }
    return "";
  }

 private:
  CSchedule(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
};

// "constant" needs `c`; "cuberoot" uses `kappa`.
inline CSchedule parse_schedule(std::string_view name, std::optional<double> c,
                                double kappa = CSchedule::kDefaultKappa) {
  if (name == "constant") {
    require(c.has_value(), "constant schedule needs a value of c");
    return CSchedule::constant(*c);
  }
  if (name == "one-over-n") return CSchedule::one_over_n();
  if (name == "m-over-n") return CSchedule::m_over_n();
  if (name == "cuberoot") return CSchedule::cube_root_log(kappa);
  fail(ErrorKind::kInvalidArgument, "unknown c schedule '" + std::string(name) +
                                        "' (constant, one-over-n, m-over-n, cuberoot)");
}

// ---------------------------------------------------------------------------
// Estimators

// Produces `count` i.i.d. values from a stream.
template <class S>
concept SampleSource = requires(const S& s, RandomStream& r, std::size_t k) {
  { s(r, k) } -> std::convertible_to<std::vector<double>>;
};

inline auto sampler_of(const DistributionSpec& dist) {
  return [&dist](RandomStream& r, std::size_t k) { return sample(dist, r, k); };
}

inline void check_estimate_inputs(std::size_t n, std::size_t m, const Guard& c,
                                  std::size_t reps) {
  require(reps >= 1, "reps must be >= 1");
  require(m >= 1 && m < n, "need 1 <= m < n");
  if (!c.covers(m, n)) {
    fail(ErrorKind::kPreconditionC, "c = " + format_number(c.value()) + " < m/N = " +
                                        std::to_string(m) + "/" + std::to_string(n));
  }
}

// Monte Carlo estimate of Delta^worst_{N,m}: the mean of delta^worst_m over
// draws of the N - m other samples.
template <SampleSource S>
EstimateReport estimate_delta_worst_from(const S& source, std::size_t n, std::size_t m,
                                         const Guard& c, std::size_t reps,
                                         std::uint64_t seed, std::size_t workers = 0) {
  check_estimate_inputs(n, m, c, reps);
  const auto values = run_replications(
      reps, seed,
      [&](RandomStream& stream, std::size_t) {
        const auto v = SampleVector::from_values(source(stream, n - m));
        return worst_case_delta(v, m, c).delta;
      },
      workers);
  return summarize(values, seed, n, m, c.value());
}

inline EstimateReport estimate_delta_worst(const DistributionSpec& dist, std::size_t n,
                                           std::size_t m, const Guard& c, std::size_t reps,
                                           std::uint64_t seed, std::size_t workers = 0) {
  return estimate_delta_worst_from(sampler_of(dist), n, m, c, reps, seed, workers);
}

enum class Comparison { kLess, kLessEqual };

// The event bound as a multiple of N: a fixed fraction or 2c.
struct EventBound {
  bool twice_c = false;
  Fraction fixed;

  static EventBound fraction(Fraction f) { return {false, f}; }
  static EventBound two_c() { return {true, Fraction()}; }

  Fraction resolve(const Guard& c) const { return twice_c ? c.fraction().scaled(2) : fixed; }
  std::string name() const { return twice_c ? "2c" : format_number(fixed.value()); }
};

// k* < x*n (or <=), exactly.
inline bool index_event(std::size_t k_star, const Fraction& x, std::size_t n,
                        Comparison cmp) {
  const int s = x.compare_index(k_star, n);
  return cmp == Comparison::kLess ? s < 0 : s <= 0;
}

// Pr[k* < bound*N] (or <=) for guarded ERM on N - m draws under m sentinels.
template <SampleSource S>
EstimateReport estimate_event_prob_from(const S& source, std::size_t n, std::size_t m,
                                        const Guard& c, EventBound bound, Comparison cmp,
                                        std::size_t reps, std::uint64_t seed,
                                        std::size_t workers = 0) {
  check_estimate_inputs(n, m, c, reps);
  const Fraction x = bound.resolve(c);
  const auto hits = run_replications(
      reps, seed,
      [&](RandomStream& stream, std::size_t) {
        const auto v = SampleVector::from_values(source(stream, n - m));
        const auto out = erm_with_sentinels(v, m, c);
        return index_event(out.k_star, x, n, cmp) ? 1.0 : 0.0;
      },
      workers);
  return summarize_binomial(hits, seed, n, m, c.value());
}

inline EstimateReport estimate_event_prob(const DistributionSpec& dist, std::size_t n,
                                          std::size_t m, const Guard& c, EventBound bound,
                                          Comparison cmp, std::size_t reps,
                                          std::uint64_t seed, std::size_t workers = 0) {
  return estimate_event_prob_from(sampler_of(dist), n, m, c, bound, cmp, reps, seed,
                                  workers);
}

// Width of the quantile band around j/N that the sorted samples stay inside
// with probability >= 1 - delta.
inline double quantile_band(std::size_t n, std::size_t m, double delta) {
  const double k = static_cast<double>(n - m);
  const double l = std::log(2.0 * k / delta);
  return std::sqrt(2.0 * l / k) + l / k + static_cast<double>(m) / static_cast<double>(n);
}

// Fraction of trials in which some sorted sample at merged index j > m has
// quantile q_j = Pr[X >= v_j] outside j/N +- quantile_band. Needs a
// continuous distribution.
inline EstimateReport quantile_concentration_failure(const DistributionSpec& dist,
                                                     std::size_t n, std::size_t m,
                                                     double delta, std::size_t trials,
                                                     std::uint64_t seed,
                                                     std::size_t workers = 0) {
  require(!dist.has_atoms(), "quantile concentration needs a continuous distribution");
  require(m < n && trials >= 1, "need m < n and trials >= 1");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  const double eps = quantile_band(n, m, delta);
  const double dn = static_cast<double>(n);
  const auto hits = run_replications(
      trials, seed,
      [&](RandomStream& stream, std::size_t) {
        auto v = sample(dist, stream, n - m);
        std::sort(v.begin(), v.end(), std::greater<>());
        for (std::size_t i = 0; i < v.size(); ++i) {
          const double j = static_cast<double>(i + m + 1);
          if (std::abs(dist.tail(v[i]) - j / dn) > eps) return 1.0;
        }
        return 0.0;
      },
      workers);
  return summarize_binomial(hits, seed, n, m, 0.0);
}

// ---------------------------------------------------------------------------
// Sweeps and CSV output

struct Metric {
  enum class Kind { kDeltaWorst, kEventProb };
  Kind kind = Kind::kDeltaWorst;
  EventBound bound;
  Comparison cmp = Comparison::kLess;

  static Metric delta_worst() { return {}; }
  static Metric event_prob(EventBound bound, Comparison cmp) {
    return {Kind::kEventProb, bound, cmp};
  }
  std::string name() const {
    return kind == Kind::kDeltaWorst ? "delta_worst" : "event_prob";
  }
};

// One output line. `report` is empty when the row failed; `error` then says why.
struct CsvRow {
  std::string distribution;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<double> c;
  std::string schedule;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::string metric;
  std::optional<EstimateReport> report;
  std::string error;
};

inline constexpr std::string_view kCsvHeader =
    "distribution,n,m,c,schedule,reps,seed,metric,mean,stderr,ci95_lo,ci95_hi,error";

inline std::string format_17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_csv_header(std::ostream& os) { os << kCsvHeader << '\n'; }

inline void write_csv_row(std::ostream& os, const CsvRow& row) {
  os << csv_field(row.distribution) << ',' << row.n << ',' << row.m << ','
     << (row.c ? format_17(*row.c) : "") << ',' << csv_field(row.schedule) << ','
     << row.reps << ',' << row.seed << ',' << row.metric << ',';
  if (row.report) {
    os << format_17(row.report->mean) << ',' << format_17(row.report->std_error) << ','
       << format_17(row.report->ci95_lo) << ',' << format_17(row.report->ci95_hi) << ',';
  } else {
    os << ",,,,";
  }
  os << csv_field(row.error) << '\n';
}

struct SweepOptions {
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
};

// One row per N. Row N uses seed derive_seed(seed, N); the row reports the
// master seed. A failing N records its error and the sweep moves on.
inline std::vector<CsvRow> sweep(const DistributionSpec& dist,
                                 std::span<const std::size_t> n_list, std::size_t m,
                                 const CSchedule& schedule, const Metric& metric,
                                 const SweepOptions& opt) {
  require(!n_list.empty(), "sweep needs at least one N");
  require(std::is_sorted(n_list.begin(), n_list.end(), std::less_equal<>()),
          "sweep N values must be strictly ascending");
  std::vector<CsvRow> rows;
  for (std::size_t n : n_list) {
    CsvRow row{dist.name(), n, m, std::nullopt, schedule.name(), opt.reps, opt.seed,
               metric.name(), std::nullopt, ""};
    try {
      const Guard c = schedule.evaluate(n, m);
      row.c = c.value();
      const std::uint64_t s = derive_seed(opt.seed, n);
      EstimateReport r =
          metric.kind == Metric::Kind::kDeltaWorst
              ? estimate_delta_worst(dist, n, m, c, opt.reps, s, opt.workers)
              : estimate_event_prob(dist, n, m, c, metric.bound, metric.cmp, opt.reps, s,
                                    opt.workers);
      r.seed = opt.seed;
      row.report = r;
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace iam
