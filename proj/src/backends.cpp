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

#include "llmroute/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace llmroute {
namespace {

struct ParsedUrl {
  std::string host_and_port;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_http_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    raise(Errc::InvalidConfig, "backend URL must start with http:// : '" + url + "'");
  }
  const std::size_t host_begin = scheme.size();
  const std::size_t path_begin = url.find('/', host_begin);
  const std::string host =
      path_begin == std::string::npos ? url.substr(host_begin)
                                      : url.substr(host_begin, path_begin - host_begin);
  if (host.empty()) {
    raise(Errc::InvalidConfig, "backend URL has no host: '" + url + "'");
  }
  ParsedUrl parsed;
  parsed.host_and_port = scheme + host;
  parsed.path = path_begin == std::string::npos ? "/" : url.substr(path_begin);
  return parsed;
}

}  // namespace

SimulatedBackend::SimulatedBackend(std::string id, SimulatedBackendSpec spec,
                                   double latency_floor_ms)
    : id_(std::move(id)), spec_(std::move(spec)), latency_floor_ms_(latency_floor_ms) {
  if (!(spec_.base_latency_ms > 0.0)) {
    raise(Errc::InvalidConfig, "base_latency_ms must be > 0");
  }
  if (!(spec_.mean_quality > 0.0 && spec_.mean_quality <= 1.0)) {
    raise(Errc::InvalidConfig, "mean_quality must be in (0, 1]");
  }
  if (spec_.latency_jitter < 0.0 || spec_.quality_jitter < 0.0) {
    raise(Errc::InvalidConfig, "jitter values must be nonnegative");
  }
}

BackendResponse SimulatedBackend::execute(const QueryRequest& request,
                                          RngStream& rng) const {
  // Both draws happen unconditionally so the stream layout does not depend
  // on the jitter settings.
  const double latency_mult = std::exp(spec_.latency_jitter * rng.normal());
  const double quality_draw = spec_.mean_quality + spec_.quality_jitter * rng.normal();

  BackendResponse response;
  response.backend_id = id_;
  response.latency_ms = std::max(spec_.base_latency_ms * latency_mult, latency_floor_ms_);
  response.drawn_quality = std::clamp(quality_draw, 0.0, 1.0);
  response.text = spec_.canned_text.empty()
                      ? "simulated response from " + id_ + " (round " +
                            std::to_string(request.round) + ")"
                      : spec_.canned_text;
  return response;
}

HttpBackend::HttpBackend(std::string id, HttpBackendConfig config)
    : id_(std::move(id)), config_(std::move(config)) {
  if (config_.model.empty()) {
    raise(Errc::InvalidConfig, "http backend needs a model name");
  }
  if (!(config_.timeout_ms > 0.0)) {
    raise(Errc::InvalidConfig, "timeout_ms must be > 0");
  }
  const ParsedUrl parsed = parse_http_url(config_.url);
  host_and_port_ = parsed.host_and_port;
  path_ = parsed.path;
}

BackendResponse HttpBackend::execute(const QueryRequest& request, RngStream&) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", 0},
  };

  httplib::Client client(host_and_port_);
  const auto timeout = std::chrono::milliseconds(
      static_cast<long long>(std::ceil(config_.timeout_ms)));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    const char* token = std::getenv(config_.auth_env.c_str());
    if (token == nullptr) {
      raise(Errc::BackendUnavailable,
            "auth token env var '" + config_.auth_env + "' is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const auto start = std::chrono::steady_clock::now();
  httplib::Result result = client.Post(path_, headers, body.dump(), "application/json");
  const auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  if (!result) {
    const auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout ||
        ((err == httplib::Error::Read || err == httplib::Error::Write) &&
         elapsed >= config_.timeout_ms * 0.9)) {
      raise(Errc::Timeout, "backend '" + id_ + "' exceeded " +
                               std::to_string(config_.timeout_ms) + " ms deadline");
    }
    raise(Errc::BackendUnavailable,
          "backend '" + id_ + "' request failed: " + httplib::to_string(err));
  }
  if (result->status != 200) {
    raise(Errc::BackendUnavailable, "backend '" + id_ + "' returned HTTP " +
                                        std::to_string(result->status));
  }

  std::string text;
  try {
    const nlohmann::json reply = nlohmann::json::parse(result->body);
    text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::BackendUnavailable,
          "backend '" + id_ + "' returned an unparseable body: " + e.what());
  }

  BackendResponse response;
  response.text = std::move(text);
  response.latency_ms = std::max(elapsed, 0.001);
  response.backend_id = id_;
  return response;
}

std::string BackendRegistry::register_backend(std::string ref,
                                              std::shared_ptr<Backend> backend) {
  if (ref.empty()) {
    raise(Errc::InvalidConfig, "backend ref must be nonempty");
  }
  if (backends_.count(ref) != 0) {
    raise(Errc::DuplicateId, "backend ref '" + ref + "' already registered");
  }
  backends_.emplace(ref, std::move(backend));
  return ref;
}

std::string BackendRegistry::register_simulated(std::string ref, SimulatedBackendSpec spec,
                                                double latency_floor_ms) {
  auto backend = std::make_shared<SimulatedBackend>(ref, std::move(spec), latency_floor_ms);
  return register_backend(std::move(ref), std::move(backend));
}

std::string BackendRegistry::register_http(std::string ref, HttpBackendConfig config) {
  auto backend = std::make_shared<HttpBackend>(ref, std::move(config));
  return register_backend(std::move(ref), std::move(backend));
}

const Backend& BackendRegistry::resolve(std::string_view ref) const {
  const auto it = backends_.find(std::string(ref));
  if (it == backends_.end()) {
    raise(Errc::BackendUnavailable, "no backend registered as '" + std::string(ref) + "'");
  }
  return *it->second;
}

bool BackendRegistry::contains(std::string_view ref) const {
  return backends_.count(std::string(ref)) != 0;
}

}  // namespace llmroute
