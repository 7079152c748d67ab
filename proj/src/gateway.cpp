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

#include "llmroute/gateway.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "config_json.hpp"
#include "llmroute/engine.hpp"
#include "llmroute/harness.hpp"
#include "llmroute/scoring.hpp"

namespace llmroute {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

int http_status_for(Errc code) {
  switch (code) {
    case Errc::SessionNotFound:
      return 404;
    case Errc::RoundFailed:
    case Errc::BackendUnavailable:
    case Errc::Timeout:
      return 502;
    default:
      return 400;
  }
}

void write_error(httplib::Response& res, Errc code, const std::string& message) {
  res.status = http_status_for(code);
  res.set_content(json{{"error", errc_name(code)}, {"message", message}}.dump(),
                  "application/json");
}

}  // namespace

GatewayConfig parse_gateway_config_text(const std::string& json_text) {
  const json obj = detail::parse_json_text(json_text, "gateway config");
  GatewayConfig config;
  config.listen_address = obj.value("listen_address", config.listen_address);
  config.listen_port = obj.value("listen_port", config.listen_port);
  if (obj.contains("default_session")) {
    config.default_session =
        detail::session_config_from_json(obj.at("default_session"), config.default_session);
  }
  if (!obj.contains("models")) {
    raise(Errc::ParseError, "gateway config needs a \"models\" array");
  }
  BuiltPool built =
      detail::pool_from_json(obj.at("models"), config.default_session.latency_floor_ms);
  config.pool = std::move(built.pool);
  config.registry = std::move(built.registry);
  config.scorer_kind = obj.value("scorer", config.scorer_kind);
  if (config.scorer_kind == "llm_judge") {
    if (!obj.contains("judge_backend")) {
      raise(Errc::InvalidConfig, "llm_judge scoring needs a \"judge_backend\"");
    }
    config.judge = detail::backend_from_json(obj.at("judge_backend"), "judge",
                                             config.default_session.latency_floor_ms);
  } else if (config.scorer_kind != "oracle") {
    raise(Errc::InvalidConfig, "unknown scorer '" + config.scorer_kind + "'");
  }
  config.session_ttl_seconds = obj.value("session_ttl_seconds", config.session_ttl_seconds);
  if (!(config.session_ttl_seconds > 0.0)) {
    raise(Errc::InvalidConfig, "session_ttl_seconds must be > 0");
  }
  config.id_seed = obj.value("id_seed", config.id_seed);
  validate_pool(config.pool);
  validate_config(config.default_session, config.pool.size());
  return config;
}

GatewayConfig load_gateway_config(const std::string& path) {
  const json obj = detail::load_json_file(path);
  return parse_gateway_config_text(obj.dump());
}

struct Gateway::Impl {
  struct Entry {
    std::mutex lock;  // serializes queries within one session
    Session session;
    // Written while only the table's shared lock is held, hence atomic.
    std::atomic<Clock::rep> last_access_ns{0};

    void touch() {
      last_access_ns.store(Clock::now().time_since_epoch().count(),
                           std::memory_order_relaxed);
    }
  };

  GatewayConfig config;
  std::unique_ptr<Scorer> scorer;
  httplib::Server server;

  mutable std::shared_mutex table_lock;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions;
  std::uint64_t next_id = 0;

  explicit Impl(GatewayConfig cfg) : config(std::move(cfg)) {
    if (config.scorer_kind == "llm_judge") {
      scorer = std::make_unique<JudgeScorer>(config.judge);
    } else {
      scorer = std::make_unique<OracleScorer>();
    }
    install_routes();
  }

  // Creating a session must never hand out a router that cannot score its
  // own pool: the oracle only reads simulated responses.
  void check_scorable() const {
    if (config.scorer_kind != "oracle") return;
    for (const auto& model : config.pool.models) {
      if (!config.registry.resolve(model.backend_ref).provides_quality_metadata()) {
        raise(Errc::InvalidConfig,
              "oracle scoring cannot rate live backend '" + model.id +
                  "'; configure an llm_judge scorer or a simulated pool");
      }
    }
  }

  std::string fresh_session_id() {
    const std::uint64_t n = config.id_seed * 0x9e3779b97f4a7c15ull + next_id++;
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "sess-%016llx",
                  static_cast<unsigned long long>(n));
    return buffer;
  }

  void evict_expired() {
    const auto now = Clock::now().time_since_epoch();
    const auto ttl = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(config.session_ttl_seconds));
    std::unique_lock guard(table_lock);
    for (auto it = sessions.begin(); it != sessions.end();) {
      const Clock::duration age =
          now - Clock::duration(it->second->last_access_ns.load(std::memory_order_relaxed));
      if (age > ttl) {
        it = sessions.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::shared_ptr<Entry> find_session(const std::string& id) {
    evict_expired();
    std::shared_lock guard(table_lock);
    const auto it = sessions.find(id);
    if (it == sessions.end()) {
      raise(Errc::SessionNotFound, "no session '" + id + "'");
    }
    it->second->touch();
    return it->second;
  }

  json snapshot_json(const Session& session) {
    json snapshot;
    snapshot["session_id"] = session.id;
    snapshot["round"] = session.round();
    snapshot["policy_kind"] = policy_kind_name(session.config.policy_kind);
    snapshot["policy_snapshot"] = policy_snapshot(session.policy);
    const auto converged_arm = session.pinned.has_value()
                                   ? session.pinned
                                   : policy_converged_arm(session.policy);
    snapshot["converged"] = converged_arm.has_value();
    if (converged_arm.has_value()) {
      snapshot["pinned_model"] = session.pool.arm(*converged_arm).id;
    }
    if (!session.records.empty()) {
      const SessionMetrics metrics = session_metrics(session);
      json m;
      m["total_cost"] = metrics.total_cost;
      m["mean_latency_ms"] = metrics.mean_latency_ms;
      m["mean_accuracy"] = metrics.mean_accuracy;
      m["rounds"] = metrics.rounds;
      if (metrics.rounds_to_convergence.has_value()) {
        m["rounds_to_convergence"] = *metrics.rounds_to_convergence;
      }
      snapshot["metrics"] = std::move(m);
    }
    return snapshot;
  }

  void handle_create(const httplib::Request& req, httplib::Response& res) {
    check_scorable();
    SessionConfig session_config = config.default_session;
    if (!req.body.empty()) {
      session_config = session_config_from_json_text(req.body, session_config);
    }
    auto entry = std::make_shared<Entry>();
    std::string id;
    {
      std::unique_lock guard(table_lock);
      id = fresh_session_id();
    }
    entry->session = make_session(id, session_config, config.pool);
    entry->touch();
    {
      std::unique_lock guard(table_lock);
      sessions.emplace(id, std::move(entry));
    }
    res.status = 200;
    res.set_content(json{{"session_id", id}}.dump(), "application/json");
  }

  void handle_query(const httplib::Request& req, httplib::Response& res,
                    const std::string& id) {
    const auto entry = find_session(id);
    const json body = req.body.empty()
                          ? json::object()
                          : detail::parse_json_text(req.body, "query body");
    if (!body.contains("prompt") || !body.at("prompt").is_string() ||
        body.at("prompt").get<std::string>().empty()) {
      raise(Errc::InvalidConfig, "query needs a nonempty \"prompt\"");
    }
    std::optional<std::string> human_response;
    if (body.contains("human_response") && body.at("human_response").is_string()) {
      human_response = body.at("human_response").get<std::string>();
    }

    std::scoped_lock session_guard(entry->lock);
    Session& session = entry->session;
    const std::string answer = run_round(session, body.at("prompt").get<std::string>(),
                                         human_response, config.registry, *scorer);
    const SessionRecord& record = session.records.back();

    json reply;
    reply["answer"] = answer;
    reply["model_id"] = session.pool.arm(record.model_index).id;
    reply["latency_ms"] = record.latency_ms;
    reply["score"] = record.accuracy;
    const auto converged_arm = session.pinned.has_value()
                                   ? session.pinned
                                   : policy_converged_arm(session.policy);
    reply["converged"] = converged_arm.has_value();
    if (converged_arm.has_value()) {
      reply["pinned_model"] = session.pool.arm(*converged_arm).id;
    }
    entry->touch();
    res.status = 200;
    res.set_content(reply.dump(), "application/json");
  }

  void handle_get(httplib::Response& res, const std::string& id) {
    const auto entry = find_session(id);
    std::scoped_lock session_guard(entry->lock);
    res.status = 200;
    res.set_content(snapshot_json(entry->session).dump(), "application/json");
  }

  void handle_delete(httplib::Response& res, const std::string& id) {
    evict_expired();
    std::unique_lock guard(table_lock);
    if (sessions.erase(id) == 0) {
      raise(Errc::SessionNotFound, "no session '" + id + "'");
    }
    res.status = 204;
  }

  template <typename Fn>
  void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      write_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      write_error(res, Errc::InvalidConfig, e.what());
    }
  }

  void install_routes() {
    server.Post("/v1/sessions",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] { handle_create(req, res); });
                });
    server.Post(R"(/v1/sessions/([^/]+)/query)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  guarded(res, [&] { handle_query(req, res, req.matches[1]); });
                });
    server.Get(R"(/v1/sessions/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] { handle_get(res, req.matches[1]); });
               });
    server.Delete(R"(/v1/sessions/([^/]+))",
                  [this](const httplib::Request& req, httplib::Response& res) {
                    guarded(res, [&] { handle_delete(res, req.matches[1]); });
                  });
  }
};

Gateway::Gateway(GatewayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Gateway::~Gateway() { stop(); }

int Gateway::bind_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool Gateway::listen_after_bind() { return impl_->server.listen_after_bind(); }

bool Gateway::listen() {
  return impl_->server.listen(impl_->config.listen_address, impl_->config.listen_port);
}

void Gateway::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool Gateway::is_running() const { return impl_->server.is_running(); }

std::size_t Gateway::session_count() const {
  std::shared_lock guard(impl_->table_lock);
  return impl_->sessions.size();
}

}  // namespace llmroute
