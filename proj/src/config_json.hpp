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

// JSON <-> config helpers shared by the harness, the gateway and the CLI.
// Not installed; include only from src/.

#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "llmroute/backends.hpp"
#include "llmroute/core.hpp"
#include "llmroute/harness.hpp"

namespace llmroute::detail {

nlohmann::json parse_json_text(const std::string& text, const char* what);
nlohmann::json load_json_file(const std::string& path);

RewardWeights weights_from_json(const nlohmann::json& obj, RewardWeights defaults);
SessionConfig session_config_from_json(const nlohmann::json& obj, SessionConfig defaults);

PolicyKind policy_kind_from_string(const std::string& name);
PostConvergence post_convergence_from_string(const std::string& name);
NormalizerMode normalizer_mode_from_string(const std::string& name);

/// Builds one backend from {"type": "simulated" | "http", ...}.
std::shared_ptr<Backend> backend_from_json(const nlohmann::json& obj, const std::string& id,
                                           double latency_floor_ms);

/// Builds a pool plus registry from a "models" array whose entries carry a
/// descriptor and an inline "backend" object.
BuiltPool pool_from_json(const nlohmann::json& models, double latency_floor_ms);

}  // namespace llmroute::detail
