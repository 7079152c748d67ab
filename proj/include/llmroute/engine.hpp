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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llmroute/backends.hpp"
#include "llmroute/core.hpp"
#include "llmroute/policy.hpp"
#include "llmroute/reward.hpp"
#include "llmroute/rng.hpp"
#include "llmroute/scoring.hpp"

namespace llmroute {

/// One row of the session log.
struct SessionRecord {
  std::uint64_t round = 0;
  std::size_t model_index = 0;
  double raw_reward = 0.0;
  double normalized_reward = 0.0;
  double accuracy = 0.0;
  double cost = 0.0;
  double latency_ms = 0.0;
  double cumulative_cost = 0.0;
  std::vector<double> policy_snapshot;

  bool operator==(const SessionRecord&) const = default;
};

/// A stream of contextually related queries routed by one policy instance.
/// Single-owner: exactly one caller mutates a session at a time.
struct Session {
  std::string id;
  SessionConfig config;
  ModelPool pool;
  PolicyState policy;
  RewardNormalizer normalizer;
  RngStream rng;
  std::vector<SessionRecord> records;
  std::optional<std::size_t> pinned;
  std::optional<std::uint64_t> pinned_round;
  double cumulative_cost = 0.0;
  // Consecutive positive convergence checks on the same arm; the session
  // pins once this reaches config.convergence_patience.
  std::optional<std::size_t> pin_streak_arm;
  std::uint64_t pin_streak = 0;

  std::uint64_t round() const { return records.size(); }
};

/// Validates config and pool, then assembles a fresh session.
Session make_session(std::string id, SessionConfig config, ModelPool pool);

/// Runs one routing round: select (or reuse the pinned arm), execute, score,
/// reward, update, convergence check. Appends exactly one record on success
/// and returns the answer text. A backend or scorer failure triggers a fresh
/// selection, up to config.max_attempts attempts in total; if they all fail
/// the call throws RoundFailed and leaves the session exactly as it was.
std::string run_round(Session& session, std::string_view prompt,
                      const std::optional<std::string>& human_response,
                      const BackendRegistry& registry, const Scorer& scorer);

struct SessionMetrics {
  double total_cost = 0.0;
  double mean_latency_ms = 0.0;
  double mean_accuracy = 0.0;
  std::uint64_t rounds = 0;
  std::optional<std::uint64_t> rounds_to_convergence;  // round index of the pin
  std::optional<std::size_t> converged_arm;
};

/// Totals and means over the session's records. Throws EmptySession when no
/// round has completed yet.
SessionMetrics session_metrics(const Session& session);

}  // namespace llmroute
