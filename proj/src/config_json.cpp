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

#include "config_json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace llmroute::detail {

using nlohmann::json;

json parse_json_text(const std::string& text, const char* what) {
  json parsed = json::parse(text, nullptr, false);
  if (parsed.is_discarded()) {
    raise(Errc::ParseError, std::string(what) + " is not valid JSON");
  }
  return parsed;
}

json load_json_file(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    raise(Errc::FileNotFound, "no such file: " + path);
  }
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str(), path.c_str());
}

RewardWeights weights_from_json(const json& obj, RewardWeights defaults) {
  RewardWeights weights = defaults;
  if (!obj.is_object()) {
    raise(Errc::ParseError, "weights must be a JSON object");
  }
  weights.w_a = obj.value("w_a", weights.w_a);
  weights.w_c = obj.value("w_c", weights.w_c);
  weights.w_l = obj.value("w_l", weights.w_l);
  weights.t_scaling = obj.value("t_scaling", weights.t_scaling);
  validate_weights(weights);
  return weights;
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "SLA" || name == "sla") return PolicyKind::Sla;
  if (name == "QL" || name == "ql") return PolicyKind::Ql;
  if (name == "fixed") return PolicyKind::FixedArm;
  if (name == "random") return PolicyKind::UniformRandom;
  raise(Errc::ParseError, "unknown policy_kind '" + name + "'");
}

PostConvergence post_convergence_from_string(const std::string& name) {
  if (name == "pin") return PostConvergence::Pin;
  if (name == "continue_learning") return PostConvergence::ContinueLearning;
  raise(Errc::ParseError, "unknown post_convergence '" + name + "'");
}

NormalizerMode normalizer_mode_from_string(const std::string& name) {
  if (name == "clamp01") return NormalizerMode::Clamp01;
  if (name == "running_minmax") return NormalizerMode::RunningMinMax;
  raise(Errc::ParseError, "unknown normalizer_mode '" + name + "'");
}

SessionConfig session_config_from_json(const json& obj, SessionConfig defaults) {
  if (!obj.is_object()) {
    raise(Errc::ParseError, "session config must be a JSON object");
  }
  static const char* known[] = {
      "label",   "weights",           "policy_kind",       "beta",
      "theta",   "explore_epsilon",   "convergence_delta", "ql_window",
      "post_convergence", "normalizer_mode", "rng_seed",   "fixed_arm",
      "latency_floor_ms", "max_attempts",
  };
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || key == name;
    if (!ok) raise(Errc::ParseError, "unknown session config key '" + key + "'");
  }

  SessionConfig config = defaults;
  if (obj.contains("weights")) {
    config.weights = weights_from_json(obj.at("weights"), config.weights);
  }
  if (obj.contains("policy_kind")) {
    config.policy_kind = policy_kind_from_string(obj.at("policy_kind").get<std::string>());
  }
  config.beta = obj.value("beta", config.beta);
  config.theta = obj.value("theta", config.theta);
  config.explore_epsilon = obj.value("explore_epsilon", config.explore_epsilon);
  config.convergence_delta = obj.value("convergence_delta", config.convergence_delta);
  config.ql_window = obj.value("ql_window", config.ql_window);
  if (obj.contains("post_convergence")) {
    config.post_convergence =
        post_convergence_from_string(obj.at("post_convergence").get<std::string>());
  }
  if (obj.contains("normalizer_mode")) {
    config.normalizer_mode =
        normalizer_mode_from_string(obj.at("normalizer_mode").get<std::string>());
  }
  config.rng_seed = obj.value("rng_seed", config.rng_seed);
  if (obj.contains("fixed_arm")) {
    config.fixed_arm = obj.at("fixed_arm").get<std::size_t>();
  }
  config.latency_floor_ms = obj.value("latency_floor_ms", config.latency_floor_ms);
  config.max_attempts = obj.value("max_attempts", config.max_attempts);
  return config;
}

std::shared_ptr<Backend> backend_from_json(const json& obj, const std::string& id,
                                           double latency_floor_ms) {
  if (!obj.is_object() || !obj.contains("type")) {
    raise(Errc::ParseError, "backend for '" + id + "' needs a \"type\" field");
  }
  const std::string type = obj.at("type").get<std::string>();
  if (type == "simulated") {
    SimulatedBackendSpec spec;
    spec.base_latency_ms = obj.value("base_latency_ms", spec.base_latency_ms);
    spec.latency_jitter = obj.value("latency_jitter", spec.latency_jitter);
    spec.mean_quality = obj.value("mean_quality", spec.mean_quality);
    spec.quality_jitter = obj.value("quality_jitter", spec.quality_jitter);
    spec.canned_text = obj.value("canned_text", spec.canned_text);
    return std::make_shared<SimulatedBackend>(id, std::move(spec), latency_floor_ms);
  }
  if (type == "http") {
    HttpBackendConfig config;
    config.url = obj.value("url", std::string());
    config.model = obj.value("model", std::string());
    config.auth_env = obj.value("auth_env", std::string());
    config.timeout_ms = obj.value("timeout_ms", config.timeout_ms);
    return std::make_shared<HttpBackend>(id, std::move(config));
  }
  raise(Errc::ParseError, "unknown backend type '" + type + "'");
}

BuiltPool pool_from_json(const json& models, double latency_floor_ms) {
  if (!models.is_array()) {
    raise(Errc::ParseError, "\"models\" must be an array");
  }
  BuiltPool built;
  for (const auto& entry : models) {
    ModelDescriptor descriptor;
    descriptor.id = entry.value("id", std::string());
    if (descriptor.id.empty()) {
      raise(Errc::ParseError, "every model needs a nonempty \"id\"");
    }
    descriptor.display_name = entry.value("display_name", descriptor.id);
    descriptor.cost_per_query = entry.value("cost_per_query", 0.0);
    descriptor.backend_ref = descriptor.id;
    if (!entry.contains("backend")) {
      raise(Errc::ParseError, "model '" + descriptor.id + "' needs a \"backend\"");
    }
    built.registry.register_backend(
        descriptor.backend_ref,
        backend_from_json(entry.at("backend"), descriptor.id, latency_floor_ms));
    built.pool.models.push_back(std::move(descriptor));
  }
  validate_pool(built.pool);
  return built;
}

}  // namespace llmroute::detail
