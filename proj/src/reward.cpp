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

#include "llmroute/reward.hpp"

#include <algorithm>
#include <cmath>

namespace llmroute {

double compute_raw_reward(const Observation& obs, const RewardWeights& weights,
                          double latency_floor_ms) {
  validate_weights(weights);
  const double latency = std::max(obs.latency_ms, latency_floor_ms);
  const double log_latency = std::log10(latency);
  if (log_latency <= 0.0) {
    raise(Errc::DegenerateLatency,
          "log10 of floored latency " + std::to_string(latency) +
              " ms is nonpositive; latency is likely in the wrong unit");
  }
  const double numerator = weights.w_a * obs.accuracy - weights.w_c * obs.cost;
  return numerator * weights.t_scaling / (weights.w_l * log_latency);
}

RewardValue normalize(double raw, RewardNormalizer& normalizer) {
  RewardValue value;
  value.raw = raw;
  switch (normalizer.mode) {
    case NormalizerMode::Clamp01:
      value.normalized = std::clamp(raw, 0.0, 1.0);
      break;
    case NormalizerMode::RunningMinMax: {
      if (!normalizer.seen) {
        normalizer.running_min = raw;
        normalizer.running_max = raw;
        normalizer.seen = true;
      } else {
        normalizer.running_min = std::min(normalizer.running_min, raw);
        normalizer.running_max = std::max(normalizer.running_max, raw);
      }
      const double span = normalizer.running_max - normalizer.running_min;
      value.normalized =
          span > 0.0 ? (raw - normalizer.running_min) / span : 0.5;
      break;
    }
  }
  return value;
}

}  // namespace llmroute
