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
#include <vector>

#include "llmroute/errors.hpp"

namespace llmroute {

/// One member of the routing pool: identity, per-query cost in normalized
/// currency units, and the name of the backend that serves it.
struct ModelDescriptor {
  std::string id;
  std::string display_name;
  double cost_per_query = 0.0;
  std::string backend_ref;
};

/// Ordered model pool. The index of a model in `models` is the arm index
/// used by every policy; the ordering is never mutated mid-session.
struct ModelPool {
  std::vector<ModelDescriptor> models;

  std::size_t size() const { return models.size(); }
  const ModelDescriptor& arm(std::size_t index) const { return models.at(index); }
};

/// Weights of the reward function. w_l and t_scaling sit in the denominator
/// and must be strictly positive; w_a and w_c are any nonnegative finite
/// values.
struct RewardWeights {
  double w_a = 0.5;
  double w_c = 0.25;
  double w_l = 0.25;
  double t_scaling = 3.0;
};

/// Measured outcome of one routed query.
struct Observation {
  std::size_t model_index = 0;
  double accuracy = 0.0;  // in (0, 1]
  double cost = 0.0;      // nonnegative, normalized units
  double latency_ms = 0.0;
  std::uint64_t round = 0;
};

enum class PolicyKind { Sla, Ql, FixedArm, UniformRandom };
enum class PostConvergence { Pin, ContinueLearning };
enum class NormalizerMode { Clamp01, RunningMinMax };

// log10 of a latency at or below 1 ms is nonpositive and would flip the
// reward's sign; latencies are floored here before the log.
inline constexpr double kDefaultLatencyFloorMs = 10.0;
inline constexpr std::uint64_t kDefaultQlWindow = 20;
inline constexpr int kDefaultMaxAttempts = 3;
// A single sub-threshold update is not stabilization when rewards are
// normalized online: one near-minimum sample produces a near-zero reward and
// a near-zero delta at any probability vector. The engine therefore pins
// only after this many consecutive positive convergence checks on the same
// arm.
inline constexpr std::uint64_t kDefaultConvergencePatience = 5;

/// Full per-session configuration. beta applies to the SLA policy, theta and
/// explore_epsilon to the QL policy, fixed_arm to the FixedArm baseline.
/// rng_seed is always present so every stochastic run replays exactly.
struct SessionConfig {
  RewardWeights weights;
  PolicyKind policy_kind = PolicyKind::Sla;
  double beta = 0.5;
  double theta = 0.7;
  double explore_epsilon = 0.1;
  double convergence_delta = 1e-4;
  std::uint64_t ql_window = kDefaultQlWindow;
  std::uint64_t convergence_patience = kDefaultConvergencePatience;
  PostConvergence post_convergence = PostConvergence::Pin;
  NormalizerMode normalizer_mode = NormalizerMode::Clamp01;
  std::uint64_t rng_seed = 0;
  std::optional<std::size_t> fixed_arm;
  double latency_floor_ms = kDefaultLatencyFloorMs;
  int max_attempts = kDefaultMaxAttempts;
};

/// Returns the pool unchanged iff every descriptor invariant holds.
/// Throws DuplicateId, PoolTooSmall or NegativeCost otherwise.
const ModelPool& validate_pool(const ModelPool& pool);

void validate_weights(const RewardWeights& weights);

/// Validates the fields relevant to config.policy_kind. pool_size of 0 skips
/// the fixed_arm bound check for configs validated before a pool is known.
void validate_config(const SessionConfig& config, std::size_t pool_size = 0);

const char* policy_kind_name(PolicyKind kind);
const char* post_convergence_name(PostConvergence mode);
const char* normalizer_mode_name(NormalizerMode mode);

}  // namespace llmroute
