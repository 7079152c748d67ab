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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "llmroute/backends.hpp"

using namespace llmroute;

TEST_CASE("zero-jitter simulated backend is fully deterministic") {
  SimulatedBackendSpec spec;
  spec.base_latency_ms = 1000.0;
  spec.mean_quality = 0.7;
  const SimulatedBackend backend("sim", spec);
  RngStream rng(4);
  const BackendResponse response = backend.execute({"s", "hello", 0}, rng);
  CHECK(response.latency_ms == 1000.0);
  CHECK(response.drawn_quality == 0.7);
  CHECK(response.backend_id == "sim");
  CHECK_FALSE(response.text.empty());
}

TEST_CASE("simulated draws replay identically from the same seed") {
  SimulatedBackendSpec spec;
  spec.base_latency_ms = 500.0;
  spec.latency_jitter = 0.4;
  spec.mean_quality = 0.6;
  spec.quality_jitter = 0.1;
  const SimulatedBackend backend("sim", spec);

  RngStream a(99);
  RngStream b(99);
  for (int i = 0; i < 200; ++i) {
    const BackendResponse ra = backend.execute({"s", "q", 0}, a);
    const BackendResponse rb = backend.execute({"s", "q", 0}, b);
    CHECK(ra.latency_ms == rb.latency_ms);
    CHECK(ra.drawn_quality == rb.drawn_quality);
  }
}

TEST_CASE("latency sample mean tracks the lognormal analytic mean") {
  SimulatedBackendSpec spec;
  spec.base_latency_ms = 800.0;
  spec.latency_jitter = 0.3;
  spec.mean_quality = 0.7;
  const SimulatedBackend backend("sim", spec);
  RngStream rng(123);
  double sum = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const BackendResponse response = backend.execute({"s", "q", 0}, rng);
    CHECK(response.latency_ms > 0.0);
    sum += response.latency_ms;
  }
  const double analytic = 800.0 * std::exp(0.3 * 0.3 / 2.0);
  CHECK(sum / draws == doctest::Approx(analytic).epsilon(0.03));
}

TEST_CASE("simulated latency is truncated at the floor") {
  SimulatedBackendSpec spec;
  spec.base_latency_ms = 1.0;  // far below the floor
  spec.latency_jitter = 2.0;
  spec.mean_quality = 0.7;
  const SimulatedBackend backend("sim", spec, 10.0);
  RngStream rng(5);
  for (int i = 0; i < 2000; ++i) {
    CHECK(backend.execute({"s", "q", 0}, rng).latency_ms >= 10.0);
  }
}

TEST_CASE("simulated spec validation") {
  SimulatedBackendSpec bad;
  bad.base_latency_ms = 0.0;
  CHECK_THROWS_AS(SimulatedBackend("x", bad), Error);
  bad.base_latency_ms = 100.0;
  bad.mean_quality = 0.0;  // range is open at zero
  CHECK_THROWS_AS(SimulatedBackend("x", bad), Error);
  bad.mean_quality = 1.5;
  CHECK_THROWS_AS(SimulatedBackend("x", bad), Error);
}

TEST_CASE("registry registration and resolution") {
  BackendRegistry registry;
  SimulatedBackendSpec spec;
  spec.base_latency_ms = 100.0;
  spec.mean_quality = 0.5;
  registry.register_simulated("a", spec);
  CHECK(registry.contains("a"));
  CHECK(registry.resolve("a").id() == "a");

  try {
    registry.register_simulated("a", spec);
    FAIL("expected DuplicateId");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateId);
  }

  try {
    registry.resolve("missing");
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BackendUnavailable);
  }
}

TEST_CASE("http backend config validation is eager, reachability is not") {
  BackendRegistry registry;

  HttpBackendConfig malformed;
  malformed.url = "not-a-url";
  malformed.model = "m";
  try {
    registry.register_http("bad", malformed);
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidConfig);
  }

  CHECK_THROWS_AS(registry.register_http("nohost", {"http://", "m", "", 1000.0}), Error);
  CHECK_THROWS_AS(registry.register_http("nomodel", {"http://x:1", "", "", 1000.0}), Error);

  // A well-formed URL registers fine even though nothing listens there.
  HttpBackendConfig unreachable;
  unreachable.url = "http://127.0.0.1:9";  // discard port, nothing listens
  unreachable.model = "m";
  unreachable.timeout_ms = 500.0;
  CHECK_NOTHROW(registry.register_http("late", unreachable));

  RngStream rng(1);
  try {
    registry.resolve("late").execute({"s", "q", 0}, rng);
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BackendUnavailable);
  }
}

namespace {

struct StubServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::string last_body;
  std::atomic<int> hits{0};

  explicit StubServer(int sleep_ms, const std::string& content = "stub answer",
                      int status = 200) {
    server.Post("/v1/chat/completions", [this, sleep_ms, content, status](
                                            const httplib::Request& req,
                                            httplib::Response& res) {
      hits += 1;
      last_body = req.body;
      std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
      res.status = status;
      nlohmann::json reply = {
          {"choices",
           nlohmann::json::array(
               {{{"message", {{"role", "assistant"}, {"content", content}}}}})}};
      res.set_content(reply.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~StubServer() {
    server.stop();
    thread.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }
};

}  // namespace

TEST_CASE("http backend speaks the chat-completion wire shape") {
  StubServer stub(50);
  HttpBackendConfig config;
  config.url = stub.url();
  config.model = "test-model";
  config.timeout_ms = 5000.0;
  const HttpBackend backend("live", config);

  RngStream rng(1);
  const BackendResponse response = backend.execute({"s", "ping", 3}, rng);
  CHECK(response.text == "stub answer");
  CHECK(response.backend_id == "live");
  // Server-side sleep bounds the measured latency from below; the upper
  // bound is a generous local-loopback overhead budget.
  CHECK(response.latency_ms >= 49.0);
  CHECK(response.latency_ms <= 50.0 + 1500.0);

  const nlohmann::json body = nlohmann::json::parse(stub.last_body);
  CHECK(body.at("model") == "test-model");
  CHECK(body.at("temperature") == 0);
  CHECK(body.at("messages").at(0).at("role") == "user");
  CHECK(body.at("messages").at(0).at("content") == "ping");
}

TEST_CASE("http backend sends the bearer token named by auth_env") {
  StubServer stub(0);
  stub.server.Post("/auth-echo", [&](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json reply = {
        {"choices",
         nlohmann::json::array({{{"message",
                                  {{"content", req.get_header_value("Authorization")}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });

  setenv("LLMROUTE_TEST_TOKEN", "sekrit", 1);
  HttpBackendConfig config;
  config.url = "http://127.0.0.1:" + std::to_string(stub.port) + "/auth-echo";
  config.model = "m";
  config.auth_env = "LLMROUTE_TEST_TOKEN";
  const HttpBackend backend("live", config);
  RngStream rng(1);
  CHECK(backend.execute({"s", "q", 0}, rng).text == "Bearer sekrit");

  unsetenv("LLMROUTE_TEST_TOKEN");
  try {
    backend.execute({"s", "q", 0}, rng);
    FAIL("expected BackendUnavailable when the env var is unset");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BackendUnavailable);
  }
}

TEST_CASE("http backend classifies deadline overruns as Timeout") {
  StubServer stub(1200);
  HttpBackendConfig config;
  config.url = stub.url();
  config.model = "m";
  config.timeout_ms = 200.0;
  const HttpBackend backend("slow", config);
  RngStream rng(1);
  try {
    backend.execute({"s", "q", 0}, rng);
    FAIL("expected Timeout");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Timeout);
  }
}

TEST_CASE("http backend surfaces non-200 responses as BackendUnavailable") {
  StubServer stub(0, "ignored", 503);
  HttpBackendConfig config;
  config.url = stub.url();
  config.model = "m";
  const HttpBackend backend("flaky", config);
  RngStream rng(1);
  try {
    backend.execute({"s", "q", 0}, rng);
    FAIL("expected BackendUnavailable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BackendUnavailable);
    CHECK(std::string(e.what()).find("503") != std::string::npos);
  }
}
