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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "llmroute/core.hpp"
#include "llmroute/rng.hpp"

namespace llmroute {

struct QueryRequest {
  std::string session_id;
  std::string prompt;
  std::uint64_t round = 0;
};

struct BackendResponse {
  std::string text;
  double latency_ms = 0.0;
  std::string backend_id;
  // Simulated backends stamp the quality they drew so the oracle scorer can
  // read it back. Live backends leave this empty.
  std::optional<double> drawn_quality;
};

/// Parameters of a simulated model. Latency is base_latency_ms times a
/// lognormal multiplier exp(N(0, latency_jitter^2)); quality is
/// N(mean_quality, quality_jitter^2) clamped into [0, 1].
struct SimulatedBackendSpec {
  double base_latency_ms = 1000.0;
  double latency_jitter = 0.0;
  double mean_quality = 0.7;
  double quality_jitter = 0.0;
  std::string canned_text;
};

struct HttpBackendConfig {
  std::string url;        // full endpoint, e.g. http://host:8080/v1/chat/completions
  std::string model;      // model name sent in the request body
  std::string auth_env;   // name of the env var holding the bearer token; empty = no auth
  double timeout_ms = 30000.0;
};

/// Uniform query execution surface. Implementations are immutable after
/// construction and safe to call from any number of sessions concurrently;
/// all randomness comes from the caller's stream.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse execute(const QueryRequest& request, RngStream& rng) const = 0;
  virtual const std::string& id() const = 0;
  virtual bool provides_quality_metadata() const { return false; }
};

class SimulatedBackend final : public Backend {
 public:
  SimulatedBackend(std::string id, SimulatedBackendSpec spec,
                   double latency_floor_ms = kDefaultLatencyFloorMs);

  BackendResponse execute(const QueryRequest& request, RngStream& rng) const override;
  const std::string& id() const override { return id_; }
  bool provides_quality_metadata() const override { return true; }

  const SimulatedBackendSpec& spec() const { return spec_; }

 private:
  std::string id_;
  SimulatedBackendSpec spec_;
  double latency_floor_ms_;
};

/// Chat-completion client. Sends {model, messages, temperature} and reads
/// choices[0].message.content. Network failures surface as
/// BackendUnavailable, deadline overruns as Timeout.
class HttpBackend final : public Backend {
 public:
  HttpBackend(std::string id, HttpBackendConfig config);

  BackendResponse execute(const QueryRequest& request, RngStream& rng) const override;
  const std::string& id() const override { return id_; }

  const HttpBackendConfig& config() const { return config_; }

 private:
  std::string id_;
  HttpBackendConfig config_;
  std::string host_and_port_;  // scheme://host:port
  std::string path_;
};

/// Name -> backend table. Registration validates configuration eagerly;
/// reachability is only tested when a query executes.
class BackendRegistry {
 public:
  std::string register_backend(std::string ref, std::shared_ptr<Backend> backend);
  std::string register_simulated(std::string ref, SimulatedBackendSpec spec,
                                 double latency_floor_ms = kDefaultLatencyFloorMs);
  std::string register_http(std::string ref, HttpBackendConfig config);

  const Backend& resolve(std::string_view ref) const;
  bool contains(std::string_view ref) const;
  std::size_t size() const { return backends_.size(); }

 private:
  std::unordered_map<std::string, std::shared_ptr<Backend>> backends_;
};

}  // namespace llmroute
