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

// Command-line and config-file front end. Every setting has one key, used
// both as the long flag (--key) and as the key of the flat JSON config file.
// Values given on the command line override the file.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "iam/distributions.hpp"
#include "iam/errors.hpp"
#include "json.hpp"

namespace iam::cli {

using Json = nlohmann::ordered_json;

// Malformed input; exit status 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> kCommands{"measure", "event",   "sweep",
                                                  "two-phase", "uniform", "revenue-check"};
  return kCommands;
}

struct ExperimentConfig {
  std::string command;
  std::string dist;
  std::vector<std::size_t> n{100, 400, 1600, 6400};
  std::size_t m = 1;
  std::optional<double> c;
  std::optional<std::string> c_schedule;
  double kappa = 0.2;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::string out;  // empty: standard output
  std::string format = "csv";
  std::string metric = "delta_worst";
  std::string bound = "2c";
  std::string cmp = "lt";
  std::size_t t1 = 32, t2 = 32, k1 = 2, k2 = 2, m1 = 1, m2 = 1;
  std::vector<std::size_t> units;  // empty: 1 for two-phase, {1, 2} for revenue-check
  std::size_t group = 1;
  std::optional<double> p;
  std::optional<double> target_ratio;
  std::vector<std::size_t> bidders{2, 3};

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string text_of(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline double to_double(const Json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  const std::string s = text_of(v);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw UsageError("--" + key + ": expected a number, got '" + s + "'");
  }
  return x;
}

inline std::uint64_t to_u64(const Json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  const std::string s = text_of(v);
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw UsageError("--" + key + ": expected a non-negative integer, got '" + s + "'");
  }
  return x;
}

inline std::size_t to_size(const Json& v, const std::string& key) {
  return static_cast<std::size_t>(to_u64(v, key));
}

// An array, a single integer, or a comma-separated string.
inline std::vector<std::size_t> to_size_list(const Json& v, const std::string& key) {
  std::vector<std::size_t> out;
  if (v.is_array()) {
    for (const auto& x : v) out.push_back(to_size(x, key));
  } else if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_size(Json(item), key));
    if (!v.get<std::string>().empty() && v.get<std::string>().back() == ',') {
      throw UsageError("--" + key + ": trailing comma");
    }
  } else {
    out.push_back(to_size(v, key));
  }
  if (out.empty()) throw UsageError("--" + key + ": empty list");
  return out;
}

inline std::string to_choice(const Json& v, const std::string& key,
                             std::initializer_list<std::string_view> allowed) {
  const std::string s = text_of(v);
  for (auto a : allowed) {
    if (s == a) return s;
  }
  std::string list;
  for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw UsageError("--" + key + ": '" + s + "' is not one of " + list);
}

struct Key {
  std::string name;
  std::string help;
  std::set<std::string> commands;  // empty: every command
  std::function<void(ExperimentConfig&, const Json&)> set;
  std::function<std::optional<Json>(const ExperimentConfig&)> get;
};

inline const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  static const std::set<std::string> kEstimate{"measure", "event", "sweep"};
  static const std::set<std::string> kWithC{"measure", "event", "sweep", "two-phase"};
  static const std::set<std::string> kEvent{"event", "sweep"};
  static const std::set<std::string> kTwoPhase{"two-phase"};
  static const std::vector<Key> kKeys{
      {"dist", "value distribution, e.g. equal-revenue, uniform:lo=1,hi=2", {},
       [](C& c, const Json& v) { c.dist = text_of(v); },
       [](const C& c) { return std::optional<Json>(c.dist); }},
      {"n", "sample counts N, comma-separated", {"measure", "event", "sweep", "uniform"},
       [](C& c, const Json& v) { c.n = to_size_list(v, "n"); },
       [](const C& c) { return std::optional<Json>(c.n); }},
      {"m", "number of manipulated samples", kEstimate,
       [](C& c, const Json& v) { c.m = to_size(v, "m"); },
       [](const C& c) { return std::optional<Json>(c.m); }},
      {"c", "constant guard c in [0, 1)", kWithC,
       [](C& c, const Json& v) { c.c = to_double(v, "c"); },
       [](const C& c) { return c.c ? std::optional<Json>(*c.c) : std::nullopt; }},
      {"c-schedule", "constant | one-over-n | m-over-n | cuberoot", kWithC,
       [](C& c, const Json& v) {
         c.c_schedule =
             to_choice(v, "c-schedule", {"constant", "one-over-n", "m-over-n", "cuberoot"});
       },
       [](const C& c) {
         return c.c_schedule ? std::optional<Json>(*c.c_schedule) : std::nullopt;
       }},
      {"kappa", "multiplier of the cuberoot schedule", kWithC,
       [](C& c, const Json& v) { c.kappa = to_double(v, "kappa"); },
       [](const C& c) { return std::optional<Json>(c.kappa); }},
      {"reps", "Monte Carlo replications", {},
       [](C& c, const Json& v) { c.reps = to_size(v, "reps"); },
       [](const C& c) { return std::optional<Json>(c.reps); }},
      {"seed", "master seed", {},
       [](C& c, const Json& v) { c.seed = to_u64(v, "seed"); },
       [](const C& c) { return std::optional<Json>(c.seed); }},
      {"out", "output file (default: standard output)", {},
       [](C& c, const Json& v) { c.out = text_of(v); },
       [](const C& c) { return std::optional<Json>(c.out); }},
      {"format", "csv | json", {},
       [](C& c, const Json& v) { c.format = to_choice(v, "format", {"csv", "json"}); },
       [](const C& c) { return std::optional<Json>(c.format); }},
      {"metric", "delta_worst | event_prob", {"sweep"},
       [](C& c, const Json& v) {
         c.metric = to_choice(v, "metric", {"delta_worst", "event_prob"});
       },
       [](const C& c) { return std::optional<Json>(c.metric); }},
      {"bound", "event bound as a multiple of N, or 2c", kEvent,
       [](C& c, const Json& v) {
         c.bound = text_of(v);
         if (c.bound != "2c") to_double(v, "bound");
       },
       [](const C& c) { return std::optional<Json>(c.bound); }},
      {"cmp", "lt (k* < bound N) | le (k* <= bound N)", kEvent,
       [](C& c, const Json& v) { c.cmp = to_choice(v, "cmp", {"lt", "le"}); },
       [](const C& c) { return std::optional<Json>(c.cmp); }},
      {"t1", "phase-1 auctions", kTwoPhase,
       [](C& c, const Json& v) { c.t1 = to_size(v, "t1"); },
       [](const C& c) { return std::optional<Json>(c.t1); }},
      {"t2", "phase-2 auctions", kTwoPhase,
       [](C& c, const Json& v) { c.t2 = to_size(v, "t2"); },
       [](const C& c) { return std::optional<Json>(c.t2); }},
      {"k1", "bidders per phase-1 auction", kTwoPhase,
       [](C& c, const Json& v) { c.k1 = to_size(v, "k1"); },
       [](const C& c) { return std::optional<Json>(c.k1); }},
      {"k2", "bidders per phase-2 auction", kTwoPhase,
       [](C& c, const Json& v) { c.k2 = to_size(v, "k2"); },
       [](const C& c) { return std::optional<Json>(c.k2); }},
      {"m1", "deviator's phase-1 auctions", kTwoPhase,
       [](C& c, const Json& v) { c.m1 = to_size(v, "m1"); },
       [](const C& c) { return std::optional<Json>(c.m1); }},
      {"m2", "deviator's phase-2 auctions", kTwoPhase,
       [](C& c, const Json& v) { c.m2 = to_size(v, "m2"); },
       [](const C& c) { return std::optional<Json>(c.m2); }},
      {"units", "units per auction (two-phase: one value; revenue-check: a list)",
       {"two-phase", "revenue-check"},
       [](C& c, const Json& v) { c.units = to_size_list(v, "units"); },
       [](const C& c) {
         return c.units.empty() ? std::nullopt : std::optional<Json>(c.units);
       }},
      {"group", "coalition size in the uniform-price auction", {"uniform"},
       [](C& c, const Json& v) { c.group = to_size(v, "group"); },
       [](const C& c) { return std::optional<Json>(c.group); }},
      {"p", "reserve price to check", {"revenue-check"},
       [](C& c, const Json& v) { c.p = to_double(v, "p"); },
       [](const C& c) { return c.p ? std::optional<Json>(*c.p) : std::nullopt; }},
      {"target-ratio", "pick p > v* with single-bidder revenue ratio equal to this",
       {"revenue-check"},
       [](C& c, const Json& v) { c.target_ratio = to_double(v, "target-ratio"); },
       [](const C& c) {
         return c.target_ratio ? std::optional<Json>(*c.target_ratio) : std::nullopt;
       }},
      {"bidders", "bidder counts K, comma-separated", {"revenue-check"},
       [](C& c, const Json& v) { c.bidders = to_size_list(v, "bidders"); },
       [](const C& c) { return std::optional<Json>(c.bidders); }},
  };
  return kKeys;
}

inline const Key* find_key(std::string_view name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

inline void check_consistency(const ExperimentConfig& c) {
  if (c.dist.empty()) throw UsageError("--dist is required");
  if (c.c && c.c_schedule) {
    throw UsageError("--c and --c-schedule are mutually exclusive");
  }
  if (c.c_schedule == "constant" && !c.c) {
    throw UsageError("--c-schedule constant needs --c; pass --c alone instead");
  }
  if (c.p && c.target_ratio) {
    throw UsageError("--p and --target-ratio are mutually exclusive");
  }
  if (c.command == "revenue-check" && !c.p && !c.target_ratio) {
    throw UsageError("revenue-check needs --p or --target-ratio");
  }
  if (c.command == "two-phase" && c.units.size() > 1) {
    throw UsageError("--units: two-phase takes a single value");
  }
  if (c.reps == 0) throw UsageError("--reps must be >= 1");
  try {
    (void)parse_distribution(c.dist);
  } catch (const Error& e) {
    throw UsageError(std::string("--dist: ") + e.what());
  }
  if (c.c && !(*c.c >= 0.0 && *c.c < 1.0)) throw UsageError("--c must lie in [0, 1)");
  if (!(c.kappa > 0.0) || !std::isfinite(c.kappa)) throw UsageError("--kappa must be positive");
  if (c.p && !(*c.p > 0.0 && std::isfinite(*c.p))) throw UsageError("--p must be positive");
  if (c.target_ratio && !(*c.target_ratio > 0.0 && *c.target_ratio <= 1.0)) {
    throw UsageError("--target-ratio must lie in (0, 1]");
  }
  for (auto k : c.bidders) {
    if (k == 0) throw UsageError("--bidders must be >= 1");
  }
  for (auto k : c.units) {
    if (k == 0) throw UsageError("--units must be >= 1");
  }
  if (c.group == 0) throw UsageError("--group must be >= 1");
  for (std::size_t i = 1; i < c.n.size(); ++i) {
    if (c.n[i] <= c.n[i - 1]) throw UsageError("--n must be strictly ascending");
  }
}

}  // namespace detail

// Applies `values` (key -> value) to `config`. Unknown keys and keys that do
// not belong to the command are rejected.
inline void apply(ExperimentConfig& config, const Json& values, std::string_view origin) {
  if (!values.is_object()) {
    throw UsageError(std::string(origin) + ": expected a flat JSON object");
  }
  for (const auto& [name, value] : values.items()) {
    if (name == "command") {
      if (value != config.command) {
        throw UsageError(std::string(origin) + ": command '" + detail::text_of(value) +
                         "' does not match '" + config.command + "'");
      }
      continue;
    }
    const auto* key = detail::find_key(name);
    if (key == nullptr) throw UsageError(std::string(origin) + ": unknown key '" + name + "'");
    if (!key->commands.empty() && !key->commands.contains(config.command)) {
      throw UsageError(std::string(origin) + ": --" + name + " does not apply to " +
                       config.command);
    }
    if (value.is_object() || (value.is_array() && name != "n" && name != "units" &&
                              name != "bidders")) {
      throw UsageError(std::string(origin) + ": key '" + name + "' must be a scalar");
    }
    key->set(config, value);
  }
}

// The config as a flat JSON object that `from_json` maps back to it.
inline Json to_json(const ExperimentConfig& config) {
  Json j = Json::object();
  j["command"] = config.command;
  for (const auto& k : detail::keys()) {
    if (!k.commands.empty() && !k.commands.contains(config.command)) continue;
    if (auto v = k.get(config)) j[k.name] = *v;
  }
  return j;
}

inline ExperimentConfig from_json(const Json& j) {
  if (!j.is_object() || !j.contains("command") || !j["command"].is_string()) {
    throw UsageError("config needs a \"command\" string");
  }
  ExperimentConfig c;
  c.command = j["command"].get<std::string>();
  apply(c, j, "config");
  return c;
}

inline Json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError("--config: '" + path + "' is not valid JSON: " + e.what());
  }
}

// Parses argv. Returns nothing when help was requested (and printed to
// `out`); throws UsageError on malformed input.
inline std::optional<ExperimentConfig> parse_args(int argc, const char* const* argv,
                                                  std::ostream& out) {
  CLI::App app{"Incentive-awareness experiments for guarded empirical revenue maximization",
               "iam"};
  app.require_subcommand(1);
  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::string> config_path;
  for (const auto& name : commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path[name], "flat JSON file with the same keys");
    for (const auto& k : detail::keys()) {
      if (!k.commands.empty() && !k.commands.contains(name)) continue;
      sub->add_option("--" + k.name, given[name][k.name], k.help);
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  const auto* sub = app.get_subcommands().front();
  ExperimentConfig config;
  config.command = sub->get_name();
  if (sub->count("--config") > 0) {
    apply(config, read_config_file(config_path[config.command]), "--config");
  }
  Json flags = Json::object();
  for (const auto& [name, value] : given[config.command]) {
    if (sub->count("--" + name) > 0) flags[name] = value;
  }
  apply(config, flags, "command line");
  detail::check_consistency(config);
  return config;
}

}  // namespace iam::cli
