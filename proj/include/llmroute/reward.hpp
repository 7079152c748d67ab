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

#include "llmroute/core.hpp"

namespace llmroute {

/// Raw reward plus its [0,1] normalization. Policies only ever consume
/// `normalized`; the raw value is kept for logging and analysis.
struct RewardValue {
  double raw = 0.0;
  double normalized = 0.0;
};

/// Maps raw rewards into [0,1]. Clamp01 truncates; RunningMinMax rescales
/// against the extremes seen so far, which is the mode to use when a pool's
/// raw rewards cluster outside [0,1] (cost-heavy weights routinely push the
/// numerator negative).
struct RewardNormalizer {
  NormalizerMode mode = NormalizerMode::Clamp01;
  double running_min = 0.0;
  double running_max = 0.0;
  bool seen = false;

  bool operator==(const RewardNormalizer&) const = default;
};

/// Weighted accuracy/cost/latency reward for one observation:
///
///   (w_a * accuracy - w_c * cost) / (w_l * log10(latency_ms) / t_scaling)
///
/// Latency is floored at `latency_floor_ms` before the log. Throws
/// DegenerateLatency if the floored latency still has log10 <= 0, which
/// signals latency being fed in the wrong unit.
double compute_raw_reward(const Observation& obs, const RewardWeights& weights,
                          double latency_floor_ms = kDefaultLatencyFloorMs);

/// Normalizes `raw` into [0,1], updating the normalizer's running bounds
/// first so the newest sample is always inside them.
RewardValue normalize(double raw, RewardNormalizer& normalizer);

}  // namespace llmroute
