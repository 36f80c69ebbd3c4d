// Copyright 2026 The roomsim Authors.
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

namespace roomsim {

enum class Errc {
  kInvalidArgument,
  kUnreachableT60,
  kInfiniteT60,
  kSilentIr,
  kInsufficientDecay,
  kMetadataRequired,
  kIrTooShort,
  kDegenerateGeometry,
  kSamplingFailed,
  kRateMismatch,
  kSilentSignal,
  kIo,
  kFormat,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "invalid-argument";
    case Errc::kUnreachableT60: return "unreachable-t60";
    case Errc::kInfiniteT60: return "infinite-t60";
    case Errc::kSilentIr: return "silent-ir";
    case Errc::kInsufficientDecay: return "insufficient-decay";
    case Errc::kMetadataRequired: return "metadata-required";
    case Errc::kIrTooShort: return "ir-too-short";
    case Errc::kDegenerateGeometry: return "degenerate-geometry";
    case Errc::kSamplingFailed: return "sampling-failed";
    case Errc::kRateMismatch: return "rate-mismatch";
    case Errc::kSilentSignal: return "silent-signal";
    case Errc::kIo: return "io";
    case Errc::kFormat: return "format";
  }
  return "unknown";
}

// All library failures are reported through this exception. The code lets
// callers (the CLI in particular) map failures to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class UnreachableT60Error : public Error {
 public:
  UnreachableT60Error(double requested, double minimum)
      : Error(Errc::kUnreachableT60,
              "unreachable T60: requested " + std::to_string(requested) +
                  " s, minimum achievable is " + std::to_string(minimum) +
                  " s"),
        requested_(requested),
        minimum_(minimum) {}
  double requested() const noexcept { return requested_; }
  double minimum() const noexcept { return minimum_; }

 private:
  double requested_;
  double minimum_;
};

class InsufficientDecayError : public Error {
 public:
  explicit InsufficientDecayError(double deepest_db)
      : Error(Errc::kInsufficientDecay,
              "insufficient decay: EDC only reaches " +
                  std::to_string(deepest_db) + " dB (need -35 dB)"),
        deepest_db_(deepest_db) {}
  double deepest_db() const noexcept { return deepest_db_; }

 private:
  double deepest_db_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(Errc::kInvalidArgument, what);
}

}  // namespace roomsim
