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

#include "llmroute/policy.hpp"

#include <algorithm>
#include <cmath>

namespace llmroute {
namespace {

void check_pool_size(std::size_t pool_size) {
  if (pool_size < 2) {
    raise(Errc::PoolTooSmall, "policies need a pool of at least 2 arms");
  }
}

void check_reward(double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    raise(Errc::RewardOutOfRange,
          "normalized reward " + std::to_string(reward) + " outside [0, 1]");
  }
}

}  // namespace

std::size_t greedy_arm(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t m = 1; m < values.size(); ++m) {
    if (values[m] > values[best]) best = m;
  }
  return best;
}

SlaState sla_init(std::size_t pool_size, double beta) {
  check_pool_size(pool_size);
  if (!(beta > 0.0 && beta <= 1.0)) {
    raise(Errc::InvalidBeta, "beta must be in (0, 1]");
  }
  SlaState state;
  state.probs.assign(pool_size, 1.0 / static_cast<double>(pool_size));
  state.beta = beta;
  return state;
}

std::size_t sla_select(const SlaState& state, RngStream& rng) {
  const double u = rng.uniform01();
  double cumulative = 0.0;
  for (std::size_t m = 0; m + 1 < state.probs.size(); ++m) {
    cumulative += state.probs[m];
    if (u < cumulative) return m;
  }
  return state.probs.size() - 1;
}

void sla_update(SlaState& state, std::size_t chosen, double reward_normalized) {
  check_reward(reward_normalized);
  const double step = state.beta * reward_normalized;
  double max_delta = 0.0;
  for (std::size_t m = 0; m < state.probs.size(); ++m) {
    const double delta = m == chosen ? step * (1.0 - state.probs[m])
                                     : -step * state.probs[m];
    state.probs[m] += delta;
    max_delta = std::max(max_delta, std::abs(delta));
  }
  state.last_delta = max_delta;
  state.updates += 1;
}

std::optional<std::size_t> sla_converged(SlaState& state, double convergence_delta) {
  if (state.updates == 0 || !(state.last_delta < convergence_delta)) {
    state.converged_to.reset();
    return std::nullopt;
  }
  state.converged_to = greedy_arm(state.probs);
  return state.converged_to;
}

QlState ql_init(std::size_t pool_size, double theta, double explore_epsilon) {
  check_pool_size(pool_size);
  if (!(theta > 0.0 && theta <= 1.0)) {
    raise(Errc::InvalidTheta, "theta must be in (0, 1]");
  }
  if (!(explore_epsilon >= 0.0 && explore_epsilon < 1.0)) {
    raise(Errc::InvalidEpsilon, "explore_epsilon must be in [0, 1)");
  }
  QlState state;
  state.qvalues.assign(pool_size, 0.5);
  state.visit_counts.assign(pool_size, 0);
  state.theta = theta;
  state.explore_epsilon = explore_epsilon;
  return state;
}

std::size_t ql_select(const QlState& state, RngStream& rng) {
  if (rng.uniform01() < state.explore_epsilon) {
    return rng.uniform_index(state.qvalues.size());
  }
  return greedy_arm(state.qvalues);
}

void ql_update(QlState& state, std::size_t chosen, double reward_normalized) {
  check_reward(reward_normalized);
  const double delta = state.theta * (reward_normalized - state.qvalues.at(chosen));
  state.qvalues[chosen] += delta;
  state.visit_counts[chosen] += 1;

  const std::size_t greedy = greedy_arm(state.qvalues);
  state.greedy_arm_trace.push_back(greedy);
  state.greedy_delta_trace.push_back(greedy == chosen ? std::abs(delta) : 0.0);
}

std::optional<std::size_t> ql_converged(QlState& state, double convergence_delta,
                                        std::uint64_t window) {
  state.converged_to.reset();
  const std::size_t n = state.greedy_arm_trace.size();
  if (window == 0 || n < window) return std::nullopt;

  const std::size_t start = n - static_cast<std::size_t>(window);
  const std::size_t stable = state.greedy_arm_trace[start];
  for (std::size_t i = start; i < n; ++i) {
    if (state.greedy_arm_trace[i] != stable) return std::nullopt;
    if (!(state.greedy_delta_trace[i] < convergence_delta)) return std::nullopt;
  }
  state.converged_to = greedy_arm(state.qvalues);
  return state.converged_to;
}

PolicyState make_policy(const SessionConfig& config, std::size_t pool_size) {
  validate_config(config, pool_size);
  switch (config.policy_kind) {
    case PolicyKind::Sla:
      return sla_init(pool_size, config.beta);
    case PolicyKind::Ql:
      return ql_init(pool_size, config.theta, config.explore_epsilon);
    case PolicyKind::FixedArm:
      check_pool_size(pool_size);
      return FixedArmState{*config.fixed_arm, pool_size};
    case PolicyKind::UniformRandom:
      check_pool_size(pool_size);
      return UniformRandomState{pool_size};
  }
  raise(Errc::InvalidConfig, "unknown policy kind");
}

std::size_t policy_select(const PolicyState& policy, RngStream& rng) {
  return std::visit(
      [&rng](const auto& state) -> std::size_t {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, SlaState>) {
          return sla_select(state, rng);
        } else if constexpr (std::is_same_v<T, QlState>) {
          return ql_select(state, rng);
        } else if constexpr (std::is_same_v<T, FixedArmState>) {
          return state.arm;
        } else {
          return rng.uniform_index(state.pool_size);
        }
      },
      policy);
}

void policy_update(PolicyState& policy, std::size_t chosen, double reward_normalized) {
  if (auto* sla = std::get_if<SlaState>(&policy)) {
    sla_update(*sla, chosen, reward_normalized);
  } else if (auto* ql = std::get_if<QlState>(&policy)) {
    ql_update(*ql, chosen, reward_normalized);
  }
  // Baselines do not learn.
}

std::optional<std::size_t> policy_check_convergence(PolicyState& policy,
                                                    const SessionConfig& config) {
  if (auto* sla = std::get_if<SlaState>(&policy)) {
    return sla_converged(*sla, config.convergence_delta);
  }
  if (auto* ql = std::get_if<QlState>(&policy)) {
    return ql_converged(*ql, config.convergence_delta, config.ql_window);
  }
  return std::nullopt;
}

std::vector<double> policy_snapshot(const PolicyState& policy) {
  return std::visit(
      [](const auto& state) -> std::vector<double> {
        using T = std::decay_t<decltype(state)>;
        if constexpr (std::is_same_v<T, SlaState>) {
          return state.probs;
        } else if constexpr (std::is_same_v<T, QlState>) {
          return state.qvalues;
        } else if constexpr (std::is_same_v<T, FixedArmState>) {
          std::vector<double> snapshot(state.pool_size, 0.0);
          snapshot.at(state.arm) = 1.0;
          return snapshot;
        } else {
          return std::vector<double>(state.pool_size,
                                     1.0 / static_cast<double>(state.pool_size));
        }
      },
      policy);
}

std::optional<std::size_t> policy_converged_arm(const PolicyState& policy) {
  if (const auto* sla = std::get_if<SlaState>(&policy)) return sla->converged_to;
  if (const auto* ql = std::get_if<QlState>(&policy)) return ql->converged_to;
  return std::nullopt;
}

}  // namespace llmroute
