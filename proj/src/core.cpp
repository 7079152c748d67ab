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

#include "llmroute/core.hpp"

#include <cmath>
#include <unordered_set>

namespace llmroute {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::PoolTooSmall: return "PoolTooSmall";
    case Errc::NegativeCost: return "NegativeCost";
    case Errc::InvalidBeta: return "InvalidBeta";
    case Errc::InvalidTheta: return "InvalidTheta";
    case Errc::InvalidEpsilon: return "InvalidEpsilon";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::RewardOutOfRange: return "RewardOutOfRange";
    case Errc::DegenerateLatency: return "DegenerateLatency";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::Timeout: return "Timeout";
    case Errc::MissingQualityMetadata: return "MissingQualityMetadata";
    case Errc::JudgeUnparseable: return "JudgeUnparseable";
    case Errc::RoundFailed: return "RoundFailed";
    case Errc::SessionNotFound: return "SessionNotFound";
    case Errc::EmptySession: return "EmptySession";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

const ModelPool& validate_pool(const ModelPool& pool) {
  if (pool.models.size() < 2) {
    raise(Errc::PoolTooSmall,
          "pool has " + std::to_string(pool.models.size()) +
              " model(s); routing needs at least 2");
  }
  std::unordered_set<std::string> ids;
  for (const auto& model : pool.models) {
    if (!(model.cost_per_query >= 0.0) || !std::isfinite(model.cost_per_query)) {
      raise(Errc::NegativeCost,
            "model '" + model.id + "' has invalid cost_per_query");
    }
    if (!ids.insert(model.id).second) {
      raise(Errc::DuplicateId, "duplicate model id '" + model.id + "'");
    }
  }
  return pool;
}

void validate_weights(const RewardWeights& w) {
  const bool finite = std::isfinite(w.w_a) && std::isfinite(w.w_c) &&
                      std::isfinite(w.w_l) && std::isfinite(w.t_scaling);
  if (!finite || w.w_a < 0.0 || w.w_c < 0.0 || w.w_l <= 0.0 || w.t_scaling <= 0.0) {
    raise(Errc::InvalidConfig,
          "reward weights require w_a >= 0, w_c >= 0, w_l > 0, t_scaling > 0, all finite");
  }
}

void validate_config(const SessionConfig& config, std::size_t pool_size) {
  validate_weights(config.weights);
  if (!(config.convergence_delta > 0.0) || !std::isfinite(config.convergence_delta)) {
    raise(Errc::InvalidConfig, "convergence_delta must be > 0");
  }
  if (!(config.latency_floor_ms > 0.0)) {
    raise(Errc::InvalidConfig, "latency_floor_ms must be > 0");
  }
  if (config.convergence_patience < 1) {
    raise(Errc::InvalidConfig, "convergence_patience must be >= 1");
  }
  if (config.max_attempts < 1) {
    raise(Errc::InvalidConfig, "max_attempts must be >= 1");
  }
  // Field ranges hold regardless of which policy consumes them; a config
  // carrying an out-of-range learning rate is rejected even if the selected
  // policy would ignore it.
  if (!(config.beta > 0.0 && config.beta <= 1.0)) {
    raise(Errc::InvalidBeta, "beta must be in (0, 1]");
  }
  if (!(config.theta > 0.0 && config.theta <= 1.0)) {
    raise(Errc::InvalidTheta, "theta must be in (0, 1]");
  }
  if (!(config.explore_epsilon >= 0.0 && config.explore_epsilon < 1.0)) {
    raise(Errc::InvalidEpsilon, "explore_epsilon must be in [0, 1)");
  }
  if (config.ql_window < 1) {
    raise(Errc::InvalidConfig, "ql_window must be >= 1");
  }
  if (config.policy_kind == PolicyKind::FixedArm) {
    if (!config.fixed_arm.has_value()) {
      raise(Errc::InvalidConfig, "FixedArm policy requires fixed_arm");
    }
    if (pool_size > 0 && *config.fixed_arm >= pool_size) {
      raise(Errc::InvalidConfig, "fixed_arm index out of pool range");
    }
  }
}

const char* policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Sla: return "SLA";
    case PolicyKind::Ql: return "QL";
    case PolicyKind::FixedArm: return "fixed";
    case PolicyKind::UniformRandom: return "random";
  }
  return "unknown";
}

const char* post_convergence_name(PostConvergence mode) {
  return mode == PostConvergence::Pin ? "pin" : "continue_learning";
}

const char* normalizer_mode_name(NormalizerMode mode) {
  return mode == NormalizerMode::Clamp01 ? "clamp01" : "running_minmax";
}

}  // namespace llmroute
