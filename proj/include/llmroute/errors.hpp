// Copyright 2026 The llmroute Authors.
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

namespace llmroute {

// Machine-readable failure codes. The gateway exposes these verbatim in
// error bodies, so names are part of the wire contract.
enum class Errc {
  DuplicateId,
  PoolTooSmall,
  NegativeCost,
  InvalidBeta,
  InvalidTheta,
  InvalidEpsilon,
  InvalidConfig,
  InvalidSpec,
  RewardOutOfRange,
  DegenerateLatency,
  BackendUnavailable,
  Timeout,
  MissingQualityMetadata,
  JudgeUnparseable,
  RoundFailed,
  SessionNotFound,
  EmptySession,
  FileNotFound,
  ParseError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace llmroute
