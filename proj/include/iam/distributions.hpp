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
#include <charconv>
#include <cmath>
#include <concepts>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "iam/errors.hpp"
#include "iam/random.hpp"

namespace iam {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest round-trip decimal form of a double.
inline std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

namespace family {

// Pr[X = 1] = 1 - 1/D, Pr[X = D] = 1/D.
struct TwoPoint {
  double high;
};

struct BoundedUniform {
  double lo;
  double hi;
};

struct Exponential {
  double rate;
};

// F(v) = 1 - 1/v on [1, inf).
struct EqualRevenue {};

// F(v) = 1 - 1/(v + 1) on [0, inf).
struct Triangular {};

// F(x) = 1 - (1 + (1 - alpha) x)^(-1/(1 - alpha)) on [0, inf). The virtual
// value is alpha*x - 1, so the family is alpha-strongly regular with
// equality; alpha = 1 is Exponential(1).
struct AlphaStrongPareto {
  double alpha;
};

}  // namespace family

// A value distribution from one of the named families. Immutable; safe to
// share between threads.
class DistributionSpec {
 public:
  using Family =
      std::variant<family::TwoPoint, family::BoundedUniform,
                   family::Exponential, family::EqualRevenue,
                   family::Triangular, family::AlphaStrongPareto>;

  static DistributionSpec two_point(double high) {
    require(std::isfinite(high) && high > 1.0, "two-point requires D > 1");
    return DistributionSpec(family::TwoPoint{high});
  }
  static DistributionSpec uniform(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo >= 1.0 && hi > lo,
            "uniform requires 1 <= lo < hi < inf");
    return DistributionSpec(family::BoundedUniform{lo, hi});
  }
  static DistributionSpec exponential(double rate) {
    require(std::isfinite(rate) && rate > 0.0, "exp requires rate > 0");
    return DistributionSpec(family::Exponential{rate});
  }
  static DistributionSpec equal_revenue() {
    return DistributionSpec(family::EqualRevenue{});
  }
  static DistributionSpec triangular() {
    return DistributionSpec(family::Triangular{});
  }
  static DistributionSpec alpha_pareto(double alpha) {
    require(alpha > 0.0 && alpha <= 1.0, "alpha-pareto requires alpha in (0, 1]");
    return DistributionSpec(family::AlphaStrongPareto{alpha});
  }

  const Family& family() const noexcept { return family_; }

  template <class T>
  bool is() const noexcept {
    return std::holds_alternative<T>(family_);
  }

  // Canonical string, e.g. "uniform:lo=1,hi=2". parse_distribution inverts it.
  std::string name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::TwoPoint>) {
            return "two-point:D=" + format_number(f.high);
          } else if constexpr (std::is_same_v<T, family::BoundedUniform>) {
            return "uniform:lo=" + format_number(f.lo) +
                   ",hi=" + format_number(f.hi);
          } else if constexpr (std::is_same_v<T, family::Exponential>) {
            return "exp:rate=" + format_number(f.rate);
          } else if constexpr (std::is_same_v<T, family::EqualRevenue>) {
            return "equal-revenue";
          } else if constexpr (std::is_same_v<T, family::Triangular>) {
            return "triangular";
          } else {
            return "alpha-pareto:alpha=" + format_number(f.alpha);
          }
        },
        family_);
  }

  double support_lo() const noexcept {
    return std::visit(
        [](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::TwoPoint>) return 1.0;
          else if constexpr (std::is_same_v<T, family::BoundedUniform>) return f.lo;
          else if constexpr (std::is_same_v<T, family::EqualRevenue>) return 1.0;
          else return 0.0;
        },
        family_);
  }

  double support_hi() const noexcept {
    return std::visit(
        [](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::TwoPoint>) return f.high;
          else if constexpr (std::is_same_v<T, family::BoundedUniform>) return f.hi;
          else return kInf;
        },
        family_);
  }

  bool bounded() const noexcept { return std::isfinite(support_hi()); }

  // Point masses; empty for the continuous families.
  std::vector<double> atoms() const {
    if (const auto* tp = std::get_if<family::TwoPoint>(&family_)) {
      return {1.0, tp->high};
    }
    return {};
  }

  bool has_atoms() const noexcept { return is<family::TwoPoint>(); }

  // F(v) = Pr[X <= v].
  double cdf(double v) const {
    return std::visit(
        [v](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::TwoPoint>) {
            if (v < 1.0) return 0.0;
            return v < f.high ? 1.0 - 1.0 / f.high : 1.0;
          } else if constexpr (std::is_same_v<T, family::BoundedUniform>) {
            if (v <= f.lo) return 0.0;
            if (v >= f.hi) return 1.0;
            return (v - f.lo) / (f.hi - f.lo);
          } else if constexpr (std::is_same_v<T, family::Exponential>) {
            return v <= 0.0 ? 0.0 : -std::expm1(-f.rate * v);
          } else if constexpr (std::is_same_v<T, family::EqualRevenue>) {
            return v <= 1.0 ? 0.0 : 1.0 - 1.0 / v;
          } else if constexpr (std::is_same_v<T, family::Triangular>) {
            return v <= 0.0 ? 0.0 : 1.0 - 1.0 / (v + 1.0);
          } else {
            if (v <= 0.0) return 0.0;
            const double beta = 1.0 - f.alpha;
            if (beta == 0.0) return -std::expm1(-v);
            return -std::expm1(-std::log1p(beta * v) / beta);
          }
        },
        family_);
  }

  // Pr[X > v], evaluated directly rather than as 1 - cdf(v).
  double survival(double v) const {
    return std::visit(
        [v](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::TwoPoint>) {
            if (v < 1.0) return 1.0;
            return v < f.high ? 1.0 / f.high : 0.0;
          } else if constexpr (std::is_same_v<T, family::BoundedUniform>) {
            if (v <= f.lo) return 1.0;
            if (v >= f.hi) return 0.0;
            return (f.hi - v) / (f.hi - f.lo);
          } else if constexpr (std::is_same_v<T, family::Exponential>) {
            return v <= 0.0 ? 1.0 : std::exp(-f.rate * v);
          } else if constexpr (std::is_same_v<T, family::EqualRevenue>) {
            return v <= 1.0 ? 1.0 : 1.0 / v;
          } else if constexpr (std::is_same_v<T, family::Triangular>) {
            return v <= 0.0 ? 1.0 : 1.0 / (v + 1.0);
          } else {
            if (v <= 0.0) return 1.0;
            const double beta = 1.0 - f.alpha;
            if (beta == 0.0) return std::exp(-v);
            return std::exp(-std::log1p(beta * v) / beta);
          }
        },
        family_);
  }

  // Pr[X >= v]; differs from survival(v) only at atoms.
  double tail(double v) const {
    if (const auto* tp = std::get_if<family::TwoPoint>(&family_)) {
      if (v <= 1.0) return 1.0;
      return v <= tp->high ? 1.0 / tp->high : 0.0;
    }
    return survival(v);
  }

  // Density for continuous families; nullopt for families with atoms.
  std::optional<double> pdf(double v) const {
    return std::visit(
        [v](const auto& f) -> std::optional<double> {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::TwoPoint>) {
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, family::BoundedUniform>) {
            return (v < f.lo || v > f.hi) ? 0.0 : 1.0 / (f.hi - f.lo);
          } else if constexpr (std::is_same_v<T, family::Exponential>) {
            return v < 0.0 ? 0.0 : f.rate * std::exp(-f.rate * v);
          } else if constexpr (std::is_same_v<T, family::EqualRevenue>) {
            return v < 1.0 ? 0.0 : 1.0 / (v * v);
          } else if constexpr (std::is_same_v<T, family::Triangular>) {
            return v < 0.0 ? 0.0 : 1.0 / ((v + 1.0) * (v + 1.0));
          } else {
            if (v < 0.0) return 0.0;
            const double beta = 1.0 - f.alpha;
            if (beta == 0.0) return std::exp(-v);
            return std::exp(-(1.0 / beta + 1.0) * std::log1p(beta * v));
          }
        },
        family_);
  }

  // v(q) = sup{v : Pr[X >= v] >= q}: the value a buyer reaches with
  // probability q. Non-increasing on [0, 1]; q = 0 is only defined for
  // bounded families.
  double quantile(double q) const {
    require(q >= 0.0 && q <= 1.0,
            "quantile requires q in [0, 1], got " + format_number(q));
    if (q == 0.0) {
      if (!bounded()) {
        fail(ErrorKind::kUnboundedQuantile,
             "v(0) is infinite for " + name());
      }
      return support_hi();
    }
    return std::visit(
        [q](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, family::TwoPoint>) {
            return q <= 1.0 / f.high ? f.high : 1.0;
          } else if constexpr (std::is_same_v<T, family::BoundedUniform>) {
            return f.hi - q * (f.hi - f.lo);
          } else if constexpr (std::is_same_v<T, family::Exponential>) {
            return -std::log(q) / f.rate;
          } else if constexpr (std::is_same_v<T, family::EqualRevenue>) {
            return 1.0 / q;
          } else if constexpr (std::is_same_v<T, family::Triangular>) {
            return 1.0 / q - 1.0;
          } else {
            const double beta = 1.0 - f.alpha;
            if (beta == 0.0) return -std::log(q);
            return std::expm1(-beta * std::log(q)) / beta;
          }
        },
        family_);
  }

  // R(q) = q * v(q).
  double revenue(double q) const { return q * quantile(q); }

  // Virtual value x - (1 - F(x)) / f(x); nullopt for families with atoms.
  std::optional<double> virtual_value(double v) const {
    const auto f = pdf(v);
    if (!f) return std::nullopt;
    return v - survival(v) / *f;
  }

  friend bool operator==(const DistributionSpec& a, const DistributionSpec& b) {
    return a.name() == b.name();
  }

 private:
  explicit DistributionSpec(Family f) : family_(f) {}

  Family family_;
};

// What the Monte Carlo drivers need from a distribution. DistributionSpec
// models it; tests plug in degenerate doubles.
template <class D>
concept ValueDistribution = requires(const D& d, double q) {
  { d.quantile(q) } -> std::convertible_to<double>;
  { d.name() } -> std::convertible_to<std::string>;
};

inline double cdf(const DistributionSpec& dist, double v) {
  require(v >= 0.0, "cdf requires v >= 0");
  return dist.cdf(v);
}

inline double quantile_value(const DistributionSpec& dist, double q) {
  return dist.quantile(q);
}

struct RevenueCurvePoint {
  double q;
  double value;
  double revenue;
};

inline RevenueCurvePoint revenue_curve_point(const DistributionSpec& dist,
                                             double q) {
  const double v = dist.quantile(q);
  return {q, v, q * v};
}

// Inverse-transform draw: v(u) with u uniform on (0, 1].
template <ValueDistribution D>
double draw(const D& dist, RandomStream& stream) {
  return dist.quantile(stream.uniform_open_closed());
}

template <ValueDistribution D>
std::vector<double> sample(const D& dist, RandomStream& stream,
                           std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) v = draw(dist, stream);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline double parse_real(std::string_view text, std::string_view what) {
  double x = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto res = std::from_chars(first, last, x);
  if (text.empty() || res.ec != std::errc() || res.ptr != last ||
      !std::isfinite(x)) {
    fail(ErrorKind::kParseError,
         "invalid number '" + std::string(text) + "' for " + std::string(what));
  }
  return x;
}

}  // namespace detail

// Grammar: two-point:D=2 | uniform:lo=1,hi=2 | exp:rate=1 | equal-revenue |
// triangular | alpha-pareto:alpha=0.5
inline DistributionSpec parse_distribution(std::string_view text) {
  const auto colon = text.find(':');
  const std::string family_name(text.substr(0, colon));
  std::map<std::string, double, std::less<>> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        fail(ErrorKind::kParseError,
             "expected key=value in '" + std::string(text) + "'");
      }
      const std::string key(item.substr(0, eq));
      if (params.count(key)) {
        fail(ErrorKind::kParseError, "duplicate parameter '" + key + "'");
      }
      params[key] = detail::parse_real(item.substr(eq + 1), key);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
      if (rest.empty()) {
        fail(ErrorKind::kParseError, "trailing ',' in '" + std::string(text) + "'");
      }
    }
  }

  auto take = [&](const char* key) {
    auto it = params.find(key);
    if (it == params.end()) {
      fail(ErrorKind::kParseError,
           "distribution '" + family_name + "' needs parameter '" + key + "'");
    }
    const double x = it->second;
    params.erase(it);
    return x;
  };

  std::optional<DistributionSpec> dist;
  try {
    if (family_name == "two-point") {
      dist = DistributionSpec::two_point(take("D"));
    } else if (family_name == "uniform") {
      const double lo = take("lo");
      dist = DistributionSpec::uniform(lo, take("hi"));
    } else if (family_name == "exp") {
      dist = DistributionSpec::exponential(take("rate"));
    } else if (family_name == "equal-revenue") {
      dist = DistributionSpec::equal_revenue();
    } else if (family_name == "triangular") {
      dist = DistributionSpec::triangular();
    } else if (family_name == "alpha-pareto") {
      dist = DistributionSpec::alpha_pareto(take("alpha"));
    } else {
      fail(ErrorKind::kParseError,
           "unknown distribution family '" + family_name + "'");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) {
      fail(ErrorKind::kParseError, e.what());
    }
    throw;
  }
  if (!params.empty()) {
    fail(ErrorKind::kParseError, "unknown parameter '" + params.begin()->first +
                                     "' for '" + family_name + "'");
  }
  return *dist;
}

// ---------------------------------------------------------------------------
// Optimal reserve

struct OptimalReserve {
  double v_star = std::numeric_limits<double>::quiet_NaN();
  double q_star = std::numeric_limits<double>::quiet_NaN();
  // Supremum of R(q); equals q_star * v_star when attained.
  double r_star = std::numeric_limits<double>::quiet_NaN();
  bool attained = false;
};

// Closed form per family. EqualRevenue (R constant) and Triangular (sup only
// approached as q -> 0) report attained = false with r_star = 1.
inline OptimalReserve optimal_reserve(const DistributionSpec& dist) {
  return std::visit(
      [](const auto& f) -> OptimalReserve {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, family::TwoPoint>) {
          // R = 1 at both q = 1/D and q = 1; ties go to the larger quantile.
          return {1.0, 1.0, 1.0, true};
        } else if constexpr (std::is_same_v<T, family::BoundedUniform>) {
          const double q = f.hi / (2.0 * (f.hi - f.lo));
          if (q >= 1.0) return {f.lo, 1.0, f.lo, true};
          return {f.hi / 2.0, q, f.hi * f.hi / (4.0 * (f.hi - f.lo)), true};
        } else if constexpr (std::is_same_v<T, family::Exponential>) {
          return {1.0 / f.rate, std::exp(-1.0),
                  std::exp(-1.0) / f.rate, true};
        } else if constexpr (std::is_same_v<T, family::EqualRevenue> ||
                             std::is_same_v<T, family::Triangular>) {
          OptimalReserve r;
          r.r_star = 1.0;
          return r;
        } else {
          if (f.alpha == 1.0) return {1.0, std::exp(-1.0), std::exp(-1.0), true};
          const double q = std::pow(f.alpha, 1.0 / (1.0 - f.alpha));
          return {1.0 / f.alpha, q, q / f.alpha, true};
        }
      },
      dist.family());
}

// Numeric route: scan R(q) on a geometric quantile grid from 1e-6 to 1, then
// refine the best bracket by golden-section search.
inline OptimalReserve numeric_optimal_reserve(const DistributionSpec& dist,
                                              std::size_t grid_points = 10001,
                                              double rel_tol = 1e-9) {
  require(grid_points >= 2, "numeric_optimal_reserve needs >= 2 grid points");
  const double lo = 1e-6;
  const double step = std::log(1.0 / lo) / static_cast<double>(grid_points - 1);
  std::vector<double> qs(grid_points);
  for (std::size_t k = 0; k < grid_points; ++k) {
    qs[k] = k + 1 == grid_points ? 1.0 : lo * std::exp(step * static_cast<double>(k));
  }
  std::size_t best = 0;
  double best_r = -kInf;
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double r = dist.revenue(qs[k]);
    if (r >= best_r) {
      best_r = r;
      best = k;
    }
  }
  double a = qs[best == 0 ? 0 : best - 1];
  double b = qs[best + 1 == grid_points ? best : best + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double r1 = dist.revenue(x1);
  double r2 = dist.revenue(x2);
  while (b - a > rel_tol * b) {
    if (r1 >= r2) {
      b = x2;
      x2 = x1;
      r2 = r1;
      x1 = b - inv_phi * (b - a);
      r1 = dist.revenue(x1);
    } else {
      a = x1;
      x1 = x2;
      r1 = r2;
      x2 = a + inv_phi * (b - a);
      r2 = dist.revenue(x2);
    }
  }
  double q = 0.5 * (a + b);
  double r = dist.revenue(q);
  if (best_r >= r) {
    q = qs[best];
    r = best_r;
  }
  return {dist.quantile(q), q, r, true};
}

// ---------------------------------------------------------------------------
// Class verification

enum class Check { kPass, kFail, kNotApplicable };

struct ClassReport {
  bool bounded = false;
  double support_hi = kInf;  // D when bounded
  Check mhr = Check::kNotApplicable;
  Check regular = Check::kNotApplicable;
  // Smallest finite-difference slope of the virtual value over the grid.
  double min_virtual_slope = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> mhr_violation;      // first grid value breaking MHR
  std::optional<double> regular_violation;  // first grid value with slope < 0

  bool alpha_strongly_regular(double alpha, double tol = 1e-6) const {
    return regular != Check::kNotApplicable && alpha > 0.0 &&
           min_virtual_slope >= alpha - tol;
  }
};

inline ClassReport verify_class(const DistributionSpec& dist,
                                std::size_t grid_size) {
  require(grid_size >= 100, "verify_class needs grid_size >= 100");
  ClassReport report;

  // Value grid: quantiles spaced linearly on (0, 1) plus geometrically toward
  // both tails, mapped through v(q).
  std::vector<double> qs;
  const double tail = 1e-6;
  for (std::size_t k = 0; k < grid_size; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(grid_size - 1);
    qs.push_back(tail + (1.0 - 2.0 * tail) * t);
    qs.push_back(std::pow(tail, 1.0 - t) * 0.5);
    qs.push_back(1.0 - std::pow(tail, 1.0 - t) * 0.5);
  }
  std::vector<double> vs;
  vs.reserve(qs.size());
  for (double q : qs) {
    if (q > 0.0 && q <= 1.0) vs.push_back(dist.quantile(q));
  }
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());

  const double lo = dist.support_lo();
  const double hi = dist.support_hi();
  report.bounded = lo >= 1.0 && std::isfinite(hi) &&
                   std::all_of(vs.begin(), vs.end(),
                               [&](double v) { return v >= 1.0 && v <= hi; });
  report.support_hi = hi;

  if (dist.has_atoms()) return report;

  // Stay strictly inside the support so that hazard rates are finite.
  std::erase_if(vs, [&](double v) { return v <= lo || v >= hi; });

  report.mhr = Check::kPass;
  report.regular = Check::kPass;
  report.min_virtual_slope = kInf;
  double prev_h = -kInf;
  std::optional<double> prev_v, prev_phi;
  for (double v : vs) {
    const double f = *dist.pdf(v);
    const double s = dist.survival(v);
    if (f <= 0.0 || s <= 0.0) continue;
    const double h = f / s;
    if (h < prev_h * (1.0 - 1e-9) && report.mhr == Check::kPass) {
      report.mhr = Check::kFail;
      report.mhr_violation = v;
    }
    prev_h = h;
    const double phi = v - s / f;
    if (prev_v) {
      const double slope = (phi - *prev_phi) / (v - *prev_v);
      report.min_virtual_slope = std::min(report.min_virtual_slope, slope);
      if (slope < -1e-6 && report.regular == Check::kPass) {
        report.regular = Check::kFail;
        report.regular_violation = v;
      }
    }
    prev_v = v;
    prev_phi = phi;
  }
  return report;
}

}  // namespace iam
