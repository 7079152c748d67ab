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

#include "llmroute/engine.hpp"

#include <utility>

namespace llmroute {
namespace {

bool is_round_failure(Errc code) {
  switch (code) {
    case Errc::BackendUnavailable:
    case Errc::Timeout:
    case Errc::JudgeUnparseable:
    case Errc::MissingQualityMetadata:
      return true;
    default:
      return false;
  }
}

struct RoundOutcome {
  std::size_t arm = 0;
  BackendResponse response;
  Score score;
};

// Select + execute + score, retrying on a fresh selection. Touches nothing
// but the rng stream, so a failure after the last attempt leaves no trace
// once the caller restores the stream.
RoundOutcome attempt_round(Session& session, std::string_view prompt,
                           const std::optional<std::string>& human_response,
                           const BackendRegistry& registry, const Scorer& scorer) {
  std::string last_failure;
  for (int attempt = 0; attempt < session.config.max_attempts; ++attempt) {
    const std::size_t arm = session.pinned.has_value()
                                ? *session.pinned
                                : policy_select(session.policy, session.rng);
    QueryRequest request{session.id, std::string(prompt), session.round()};
    try {
      RoundOutcome outcome;
      outcome.arm = arm;
      outcome.response =
          registry.resolve(session.pool.arm(arm).backend_ref).execute(request, session.rng);
      ScoreRequest score_request{request.prompt, outcome.response.text, human_response};
      outcome.score = scorer.score(score_request, outcome.response, session.rng);
      return outcome;
    } catch (const Error& e) {
      if (!is_round_failure(e.code())) throw;
      last_failure = std::string(errc_name(e.code())) + ": " + e.what();
    }
  }
  raise(Errc::RoundFailed, "round failed after " +
                               std::to_string(session.config.max_attempts) +
                               " attempt(s); last failure: " + last_failure);
}

}  // namespace

Session make_session(std::string id, SessionConfig config, ModelPool pool) {
  validate_pool(pool);
  validate_config(config, pool.size());
  Session session;
  session.id = std::move(id);
  session.policy = make_policy(config, pool.size());
  session.normalizer.mode = config.normalizer_mode;
  session.rng = RngStream(config.rng_seed);
  session.config = std::move(config);
  session.pool = std::move(pool);
  return session;
}

std::string run_round(Session& session, std::string_view prompt,
                      const std::optional<std::string>& human_response,
                      const BackendRegistry& registry, const Scorer& scorer) {
  // Snapshot the stream so a failed round leaves the session byte-identical.
  // Nothing below the catch can throw, so the snapshot covers every failure.
  const RngStream rng_before = session.rng;
  RoundOutcome outcome;
  Observation obs;
  double raw = 0.0;
  try {
    outcome = attempt_round(session, prompt, human_response, registry, scorer);
    obs.model_index = outcome.arm;
    obs.accuracy = outcome.score.value;
    obs.cost = session.pool.arm(outcome.arm).cost_per_query;
    obs.latency_ms = outcome.response.latency_ms;
    obs.round = session.round();
    raw = compute_raw_reward(obs, session.config.weights,
                             session.config.latency_floor_ms);
  } catch (...) {
    session.rng = rng_before;
    throw;
  }

  const RewardValue reward = normalize(raw, session.normalizer);

  if (!session.pinned.has_value()) {
    policy_update(session.policy, obs.model_index, reward.normalized);
    const auto converged = policy_check_convergence(session.policy, session.config);
    if (converged.has_value() && session.pin_streak_arm == converged) {
      session.pin_streak += 1;
    } else {
      session.pin_streak_arm = converged;
      session.pin_streak = converged.has_value() ? 1 : 0;
    }
    if (converged.has_value() &&
        session.pin_streak >= session.config.convergence_patience &&
        session.config.post_convergence == PostConvergence::Pin) {
      session.pinned = *converged;
      session.pinned_round = obs.round;
    }
  }

  session.cumulative_cost += obs.cost;
  SessionRecord record;
  record.round = obs.round;
  record.model_index = obs.model_index;
  record.raw_reward = raw;
  record.normalized_reward = reward.normalized;
  record.accuracy = obs.accuracy;
  record.cost = obs.cost;
  record.latency_ms = obs.latency_ms;
  record.cumulative_cost = session.cumulative_cost;
  record.policy_snapshot = policy_snapshot(session.policy);
  session.records.push_back(std::move(record));

  return outcome.response.text;
}

SessionMetrics session_metrics(const Session& session) {
  if (session.records.empty()) {
    raise(Errc::EmptySession, "session '" + session.id + "' has no records");
  }
  SessionMetrics metrics;
  metrics.rounds = session.records.size();
  double latency_sum = 0.0;
  double accuracy_sum = 0.0;
  for (const auto& record : session.records) {
    metrics.total_cost += record.cost;
    latency_sum += record.latency_ms;
    accuracy_sum += record.accuracy;
  }
  const auto n = static_cast<double>(metrics.rounds);
  metrics.mean_latency_ms = latency_sum / n;
  metrics.mean_accuracy = accuracy_sum / n;
  metrics.rounds_to_convergence = session.pinned_round;
  metrics.converged_arm = session.pinned.has_value()
                              ? session.pinned
                              : policy_converged_arm(session.policy);
  return metrics;
}

}  // namespace llmroute
