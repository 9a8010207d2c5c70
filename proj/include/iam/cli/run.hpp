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

// Dispatch from an ExperimentConfig to the library, plus CSV / JSON output.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iam/auctions/revenue.hpp"
#include "iam/auctions/two_phase.hpp"
#include "iam/auctions/uniform_price.hpp"
#include "iam/cli/config.hpp"
#include "iam/distributions.hpp"
#include "iam/errors.hpp"
#include "iam/montecarlo.hpp"
#include "iam/random.hpp"

namespace iam::cli {

enum ExitStatus : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2 };

// --c wins; otherwise --c-schedule, defaulting to m-over-n.
inline CSchedule schedule_of(const ExperimentConfig& cfg) {
  if (cfg.c) return CSchedule::constant(*cfg.c);
  return parse_schedule(cfg.c_schedule.value_or("m-over-n"), std::nullopt, cfg.kappa);
}

inline Metric metric_of(const ExperimentConfig& cfg) {
  const bool event =
      cfg.command == "event" || (cfg.command == "sweep" && cfg.metric == "event_prob");
  if (!event) return Metric::delta_worst();
  const EventBound bound = cfg.bound == "2c"
                               ? EventBound::two_c()
                               : EventBound::fraction(Fraction(std::stod(cfg.bound)));
  return Metric::event_prob(bound, cfg.cmp == "le" ? Comparison::kLessEqual
                                                   : Comparison::kLess);
}

namespace detail {

inline CsvRow make_row(const ExperimentConfig& cfg, const DistributionSpec& dist,
                       std::size_t n, std::size_t m, std::optional<double> c,
                       std::string schedule, std::string metric,
                       std::optional<EstimateReport> report) {
  if (report) report->seed = cfg.seed;
  return CsvRow{dist.name(), n,         m,        c, std::move(schedule),
                cfg.reps,    cfg.seed,  std::move(metric), report, ""};
}

inline std::vector<CsvRow> run_two_phase_rows(const ExperimentConfig& cfg,
                                              const DistributionSpec& dist) {
  TwoPhaseConfig tp;
  tp.dist = dist;
  tp.t1 = cfg.t1;
  tp.t2 = cfg.t2;
  tp.k1 = cfg.k1;
  tp.k2 = cfg.k2;
  tp.m1 = cfg.m1;
  tp.m2 = cfg.m2;
  tp.units = cfg.units.empty() ? 1 : cfg.units.front();
  const CSchedule schedule = schedule_of(cfg);
  tp.c = schedule.evaluate(tp.phase1_bids(), tp.m1);
  const auto r = estimate_deviation_gain(tp, cfg.reps, cfg.seed);
  const std::size_t n = tp.phase1_bids();
  const double c = tp.c.value();
  std::vector<CsvRow> rows;
  rows.push_back(make_row(cfg, dist, n, tp.m1, c, schedule.name(), "deviation_gain_realized",
                          r.realized));
  rows.push_back(make_row(cfg, dist, n, tp.m1, c, schedule.name(), "deviation_gain_bound",
                          r.bound));
  if (r.max_excess > 0.0) {
    // Cannot happen if the accounting is right; surface it rather than hide it.
    rows.front().error = "bound exceeded by " + format_17(r.max_excess);
  }
  if (r.revenue_ratio) {
    rows.push_back(make_row(cfg, dist, n, tp.m1, c, schedule.name(), "revenue_ratio",
                            r.revenue_ratio));
  }
  return rows;
}

inline std::vector<CsvRow> run_uniform_rows(const ExperimentConfig& cfg,
                                            const DistributionSpec& dist) {
  std::vector<CsvRow> rows;
  for (std::size_t n : cfg.n) {
    CsvRow gain = make_row(cfg, dist, n, cfg.group, std::nullopt,
                           cfg.group == 1 ? "one-over-n" : "m-over-n", "group_gain",
                           std::nullopt);
    CsvRow drop = gain;
    drop.metric = "price_drop";
    try {
      const auto r = run_uniform_price(dist, n, cfg.group, cfg.reps, derive_seed(cfg.seed, n));
      gain.c = drop.c = r.c;
      gain.report = r.gain;
      drop.report = r.price_drop;
      gain.report->seed = drop.report->seed = cfg.seed;
      if (r.max_excess > 0.0) gain.error = "bound exceeded by " + format_17(r.max_excess);
    } catch (const Error& e) {
      gain.error = drop.error = e.what();
    }
    rows.push_back(std::move(gain));
    rows.push_back(std::move(drop));
  }
  return rows;
}

// The reserve p > v* whose single-bidder revenue is `target` * R*. Bisection;
// fails when no price above v* gets that low.
inline double solve_reserve(const DistributionSpec& dist, double target) {
  const auto star = attained_reserve(dist);
  const auto ratio = [&](double p) { return p * dist.tail(p) / star.r_star; };
  double lo = star.v_star;
  double hi = 2.0 * star.v_star;
  for (int i = 0; ratio(hi) > target; ++i) {
    if (i == 200) {
      fail(ErrorKind::kInvalidArgument,
           "no reserve above v* = " + format_number(star.v_star) + " has revenue ratio " +
               format_number(target));
    }
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && lo < hi; ++i) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (ratio(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

inline std::vector<CsvRow> run_revenue_rows(const ExperimentConfig& cfg,
                                            const DistributionSpec& dist) {
  const double p = cfg.p ? *cfg.p : solve_reserve(dist, *cfg.target_ratio);
  const std::string schedule = "reserve:p=" + format_17(p);
  const std::vector<std::size_t> units =
      cfg.units.empty() ? std::vector<std::size_t>{1, 2} : cfg.units;
  const auto star = attained_reserve(dist);
  const double single = p * dist.tail(p) / star.r_star;
  std::vector<CsvRow> rows;
  rows.push_back(make_row(cfg, dist, 1, 1, std::nullopt, schedule, "ratio_single",
                          finish_report(single, 0.0, cfg.reps, cfg.seed, 1, 1, 0.0)));
  for (std::size_t k_bidders : cfg.bidders) {
    for (std::size_t k : units) {
      CsvRow row = make_row(cfg, dist, k_bidders, k, std::nullopt, schedule, "ratio_multi",
                            std::nullopt);
      try {
        const auto r = revenue_ratio_check(dist, p, k_bidders, k, cfg.reps,
                                           derive_seed(derive_seed(cfg.seed, k_bidders), k));
        row.report = r.ratio_multi;
        row.report->seed = cfg.seed;
      } catch (const Error& e) {
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline Json json_row(const CsvRow& row, bool full) {
  Json j = Json::object();
  if (full) {
    j["distribution"] = row.distribution;
    j["schedule"] = row.schedule;
    j["metric"] = row.metric;
  }
  const auto stat = [&](double EstimateReport::*f) {
    return row.report ? Json((*row.report).*f) : Json(nullptr);
  };
  j["mean"] = stat(&EstimateReport::mean);
  j["stderr"] = stat(&EstimateReport::std_error);
  j["ci95_lo"] = stat(&EstimateReport::ci95_lo);
  j["ci95_hi"] = stat(&EstimateReport::ci95_hi);
  j["reps"] = row.reps;
  j["seed"] = row.seed;
  j["n"] = row.n;
  j["m"] = row.m;
  j["c"] = row.c ? Json(*row.c) : Json(nullptr);
  if (full) j["error"] = row.error;
  return j;
}

}  // namespace detail

// Rows for any command. Library errors that concern a single row are kept in
// that row; anything else propagates.
inline std::vector<CsvRow> compute_rows(const ExperimentConfig& cfg) {
  const DistributionSpec dist = parse_distribution(cfg.dist);
  if (cfg.command == "measure" || cfg.command == "event" || cfg.command == "sweep") {
    SweepOptions opt;
    opt.reps = cfg.reps;
    opt.seed = cfg.seed;
    return sweep(dist, cfg.n, cfg.m, schedule_of(cfg), metric_of(cfg), opt);
  }
  if (cfg.command == "two-phase") return detail::run_two_phase_rows(cfg, dist);
  if (cfg.command == "uniform") return detail::run_uniform_rows(cfg, dist);
  if (cfg.command == "revenue-check") return detail::run_revenue_rows(cfg, dist);
  throw UsageError("unknown command '" + cfg.command + "'");
}

// CSV, or JSON: one object with the EstimateReport fields for a single row,
// otherwise an array of objects that also name the metric and any error.
inline std::string render(const std::vector<CsvRow>& rows, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    Json j;
    if (rows.size() == 1) {
      j = detail::json_row(rows.front(), false);
    } else {
      j = Json::array();
      for (const auto& r : rows) j.push_back(detail::json_row(r, true));
    }
    os << j.dump(2) << '\n';
  } else {
    write_csv_header(os);
    for (const auto& r : rows) write_csv_row(os, r);
  }
  return os.str();
}

inline std::string summary_line(const ExperimentConfig& cfg, const std::vector<CsvRow>& rows) {
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.report ? 0 : 1;
  std::ostringstream os;
  os << "iam " << cfg.command << ": " << rows.size() << " rows (" << failed << " failed), dist "
     << cfg.dist << ", reps " << cfg.reps << ", seed " << cfg.seed;
  for (const auto& r : rows) {
    if (r.report) {
      os << "; " << r.metric << "(n=" << r.n << ") = " << format_number(r.report->mean);
      break;
    }
  }
  if (!cfg.out.empty()) os << ", written to " << cfg.out;
  return os.str();
}

// Runs the experiment and writes its output. The summary goes to standard
// output when --out names a file; with output on stdout it goes to stderr so
// the data stays parseable.
inline int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const auto rows = compute_rows(cfg);
    const std::string text = render(rows, cfg.format);
    if (cfg.out.empty()) {
      out << text << std::flush;
    } else {
      std::ofstream file(cfg.out, std::ios::binary);
      if (!file || !(file << text) || !file.flush()) {
        err << "iam: error: cannot write '" << cfg.out << "'\n";
        return kExitRuntime;
      }
    }
    (cfg.out.empty() ? err : out) << summary_line(cfg, rows) << '\n';
    bool any_ok = false;
    for (const auto& r : rows) {
      any_ok = any_ok || r.report.has_value();
      if (!r.error.empty()) err << "iam: n=" << r.n << " " << r.metric << ": " << r.error << '\n';
    }
    return any_ok ? kExitOk : kExitRuntime;
  } catch (const UsageError& e) {
    err << "iam: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "iam: error: " << e.what() << " [" << to_json(cfg).dump() << "]\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "iam: internal error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

// Entry point shared by the binary and the tests.
inline int main_with(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<ExperimentConfig> cfg;
  try {
    cfg = parse_args(argc, argv, out);
  } catch (const UsageError& e) {
    err << "iam: usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!cfg) return kExitOk;
  return run(*cfg, out, err);
}

}  // namespace iam::cli
