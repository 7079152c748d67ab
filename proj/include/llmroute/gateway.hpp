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

#include <memory>
#include <string>

#include "llmroute/backends.hpp"
#include "llmroute/core.hpp"

namespace llmroute {

/// HTTP routing service configuration. The pool and backends come from the
/// same structured config format the harness uses.
struct GatewayConfig {
  std::string listen_address = "127.0.0.1";
  int listen_port = 8080;
  ModelPool pool;
  BackendRegistry registry;
  SessionConfig default_session;
  std::string scorer_kind = "oracle";  // "oracle" | "llm_judge"
  std::shared_ptr<Backend> judge;      // required when scorer_kind == "llm_judge"
  double session_ttl_seconds = 3600.0;
  std::uint64_t id_seed = 1;
};

GatewayConfig parse_gateway_config_text(const std::string& json_text);
GatewayConfig load_gateway_config(const std::string& path);

/// Session-scoped routed querying over HTTP+JSON:
///
///   POST   /v1/sessions           {config overrides?}     -> {session_id}
///   POST   /v1/sessions/{id}/query {prompt, human_response?}
///   GET    /v1/sessions/{id}                              -> state snapshot
///   DELETE /v1/sessions/{id}
///
/// Sessions live in memory and expire after the configured idle TTL.
/// Requests to one session are serialized in arrival order; distinct
/// sessions never block each other.
class Gateway {
 public:
  explicit Gateway(GatewayConfig config);
  ~Gateway();

  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Binds to an ephemeral port on `host` and returns it. Test entry point;
  /// call listen_after_bind() on a worker thread afterwards.
  int bind_any_port(const std::string& host);
  bool listen_after_bind();

  /// Binds to the configured address and serves until stop().
  bool listen();
  void stop();
  bool is_running() const;

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace llmroute
