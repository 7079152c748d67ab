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
#include <variant>
#include <vector>

#include "llmroute/core.hpp"
#include "llmroute/rng.hpp"

namespace llmroute {

// Lowest index wins ties, everywhere a tie can occur.
std::size_t greedy_arm(const std::vector<double>& values);

/// Linear Reward-Inaction automaton over the pool. `probs` is the action
/// probability vector; it stays on the simplex through every update.
struct SlaState {
  std::vector<double> probs;
  double beta = 0.5;
  double last_delta = 0.0;
  std::uint64_t updates = 0;
  std::optional<std::size_t> converged_to;

  bool operator==(const SlaState&) const = default;
};

/// Uniform probabilities over `pool_size` arms.
SlaState sla_init(std::size_t pool_size, double beta);

/// Samples an arm from the probability vector. Exactly one random draw.
std::size_t sla_select(const SlaState& state, RngStream& rng);

/// Reward-Inaction step for a normalized reward r in [0,1]:
///   P[chosen] += beta * r * (1 - P[chosen])
///   P[other]  -= beta * r * P[other]
/// Zero reward leaves the vector untouched. last_delta records max |dP|.
void sla_update(SlaState& state, std::size_t chosen, double reward_normalized);

/// Convergence test: the most recent update moved no probability by more
/// than convergence_delta. Sets and returns converged_to (the argmax arm)
/// on success, clears it and returns nullopt otherwise.
std::optional<std::size_t> sla_converged(SlaState& state, double convergence_delta);

/// Stateless Q-learning over the pool. Q values start at 0.5, the midpoint
/// of the normalized reward range. The greedy trace feeds the windowed
/// stopping rule in ql_converged.
struct QlState {
  std::vector<double> qvalues;
  double theta = 0.7;
  double explore_epsilon = 0.1;
  std::vector<std::uint64_t> visit_counts;
  std::optional<std::size_t> converged_to;
  std::vector<std::size_t> greedy_arm_trace;
  std::vector<double> greedy_delta_trace;

  bool operator==(const QlState&) const = default;
};

QlState ql_init(std::size_t pool_size, double theta, double explore_epsilon);

/// Epsilon-greedy selection: the argmax arm with probability 1 - epsilon,
/// otherwise a uniform arm over the whole pool (the greedy arm included).
std::size_t ql_select(const QlState& state, RngStream& rng);

/// Q[chosen] += theta * (r - Q[chosen]); other entries untouched.
void ql_update(QlState& state, std::size_t chosen, double reward_normalized);

/// Windowed stopping rule: converged iff at least `window` updates have been
/// applied, the greedy arm did not change over the last `window` updates,
/// and the greedy arm's Q value moved by less than convergence_delta in each
/// of them. Exploration updates to non-greedy arms do not block convergence
/// since they leave the greedy arm's value alone.
std::optional<std::size_t> ql_converged(QlState& state, double convergence_delta,
                                        std::uint64_t window);

/// Always plays one arm. Baseline for harness comparisons; goes through the
/// same engine path as the learning policies.
struct FixedArmState {
  std::size_t arm = 0;
  std::size_t pool_size = 0;

  bool operator==(const FixedArmState&) const = default;
};

/// Uniform random arm each round. Baseline.
struct UniformRandomState {
  std::size_t pool_size = 0;

  bool operator==(const UniformRandomState&) const = default;
};

using PolicyState =
    std::variant<SlaState, QlState, FixedArmState, UniformRandomState>;

/// Builds the policy state selected by config.policy_kind.
PolicyState make_policy(const SessionConfig& config, std::size_t pool_size);

std::size_t policy_select(const PolicyState& policy, RngStream& rng);
void policy_update(PolicyState& policy, std::size_t chosen, double reward_normalized);
std::optional<std::size_t> policy_check_convergence(PolicyState& policy,
                                                    const SessionConfig& config);

/// P for SLA, Q for QL; baselines report their (static) selection
/// distribution so every record row has a snapshot of the same length.
std::vector<double> policy_snapshot(const PolicyState& policy);

std::optional<std::size_t> policy_converged_arm(const PolicyState& policy);

}  // namespace llmroute
