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

#include <stdexcept>
#include <string>
#include <string_view>

namespace iam {

enum class ErrorKind {
  kInvalidArgument,
  kParseError,
  kUnboundedQuantile,
  kSentinelEligible,
  kPreconditionC,
  kPreconditionM,
  kDegeneratePrice,
  kNoAttainedReserve,
  kReversedPrices,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kUnboundedQuantile: return "UnboundedQuantile";
    case ErrorKind::kSentinelEligible: return "SentinelEligible";
    case ErrorKind::kPreconditionC: return "PreconditionC";
    case ErrorKind::kPreconditionM: return "PreconditionM";
    case ErrorKind::kDegeneratePrice: return "DegeneratePrice";
    case ErrorKind::kNoAttainedReserve: return "NoAttainedReserve";
    case ErrorKind::kReversedPrices: return "ReversedPrices";
  }
  return "Unknown";
}

// All library failures are reported through this type. what() is prefixed
// with the error name so that CLI output can be matched on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(error_name(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) {
  throw Error(kind, detail);
}

inline void require(bool ok, const std::string& detail) {
  if (!ok) fail(ErrorKind::kInvalidArgument, detail);
}

}  // namespace iam
