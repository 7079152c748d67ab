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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "llmroute/harness.hpp"

using namespace llmroute;

namespace {

std::string source_path(const std::string& relative) {
  return std::string(LLMROUTE_SOURCE_DIR) + "/" + relative;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path =
      (std::filesystem::temp_directory_path() / name).string();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  return path;
}

// Small but non-trivial experiment: 3 variants, 4 sessions, 120 rounds.
ExperimentSpec small_study_spec() {
  ExperimentSpec spec = default_cost_study_spec();
  spec.num_sessions = 4;
  spec.queries_per_session = 120;
  spec.seeds = {77};
  return spec;
}

}  // namespace

TEST_CASE("seed derivation") {
  ExperimentSpec spec = small_study_spec();
  spec.seeds = {100};
  CHECK(derive_session_seeds(spec) == std::vector<std::uint64_t>{100, 101, 102, 103});

  spec.seeds = {9, 8, 7, 6};
  CHECK(derive_session_seeds(spec) == std::vector<std::uint64_t>{9, 8, 7, 6});

  spec.seeds = {1, 2};
  try {
    validate_spec(spec);
    FAIL("expected InvalidSpec");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidSpec);
  }
}

TEST_CASE("the default pool carries the experiment cost vector") {
  const auto arms = default_pool_specs();
  REQUIRE(arms.size() == 4);
  CHECK(arms[0].cost == 0.4);
  CHECK(arms[1].cost == 0.8);
  CHECK(arms[2].cost == 0.7);
  CHECK(arms[3].cost == 0.3);
}

TEST_CASE("weight study output is identical across serial and parallel runs") {
  const ExperimentSpec spec = small_study_spec();
  const std::string serial = weight_study_csv(run_weight_study(spec, 1));
  const std::string parallel = weight_study_csv(run_weight_study(spec, 0));
  const std::string two_workers = weight_study_csv(run_weight_study(spec, 2));
  CHECK(serial == parallel);
  CHECK(serial == two_workers);
}

TEST_CASE("experiments are deterministic functions of the spec") {
  const ExperimentSpec spec = small_study_spec();
  CHECK(weight_study_csv(run_weight_study(spec)) ==
        weight_study_csv(run_weight_study(spec)));

  ExperimentSpec sweep = default_beta_sweep_spec();
  sweep.num_sessions = 3;
  sweep.queries_per_session = 200;
  CHECK(beta_sweep_csv(run_beta_sweep(sweep)) == beta_sweep_csv(run_beta_sweep(sweep)));
}

TEST_CASE("weight study rows have the documented shape") {
  const ExperimentSpec spec = small_study_spec();
  const auto rows = run_weight_study(spec);
  REQUIRE(rows.size() == spec.policy_grid.size() * spec.queries_per_session);

  const std::string csv = weight_study_csv(rows);
  CHECK(csv.rfind("policy_variant,round,running_avg_cost,running_avg_latency_ms,"
                  "total_cost,mean_latency_ms\n",
                  0) == 0);

  // Rows are grouped by variant in grid order, rounds ascending.
  for (std::size_t v = 0; v < spec.policy_grid.size(); ++v) {
    for (std::uint64_t r = 0; r < spec.queries_per_session; ++r) {
      const WeightStudyRow& row = rows[v * spec.queries_per_session + r];
      CHECK(row.policy_variant == spec.policy_grid[v].label);
      CHECK(row.round == r);
      CHECK(row.running_avg_cost > 0.0);
      CHECK(row.running_avg_latency_ms > 0.0);
    }
  }

  // The fixed-most-expensive baseline bills exactly its arm's cost per round.
  for (const auto& row : rows) {
    if (row.policy_variant == "fixed_most_expensive") {
      CHECK(row.running_avg_cost == doctest::Approx(0.8));
      CHECK(row.total_cost == doctest::Approx(0.8 * 120));
    }
  }
}

TEST_CASE("beta sweep aggregates one row per learning rate") {
  ExperimentSpec spec = default_beta_sweep_spec();
  spec.num_sessions = 3;
  // beta = 0.1 needs a few hundred rounds; leave enough room that every
  // session pins and the post-convergence column is populated.
  spec.queries_per_session = 1500;
  const auto rows = run_beta_sweep(spec);
  REQUIRE(rows.size() == spec.policy_grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].beta == spec.policy_grid[i].config.beta);
    CHECK(rows[i].mean_convergence_rounds > 0.0);
    CHECK(rows[i].mean_normalized_reward > 0.0);
    CHECK(rows[i].mean_normalized_reward <= 1.0);
    CHECK(rows[i].mean_post_convergence_score > 0.0);
  }
  const std::string csv = beta_sweep_csv(rows);
  CHECK(csv.rfind("beta,mean_convergence_rounds,mean_normalized_reward,"
                  "mean_post_convergence_score\n",
                  0) == 0);

  ExperimentSpec not_sla = spec;
  not_sla.policy_grid[0].config.policy_kind = PolicyKind::Ql;
  CHECK_THROWS_AS(run_beta_sweep(not_sla), Error);
}

// With nothing to optimize, every variant's totals sit within noise of each
// other.
TEST_CASE("identical arms leave no signal between policy variants") {
  ExperimentSpec spec = default_cost_study_spec();
  for (auto& arm : spec.pool_specs) {
    arm.cost = 0.5;
    arm.sim.base_latency_ms = 1000.0;
    arm.sim.mean_quality = 0.7;
  }
  spec.num_sessions = 6;
  spec.queries_per_session = 300;

  const auto rows = run_weight_study(spec);
  std::vector<double> costs;
  std::vector<double> latencies;
  for (const auto& row : rows) {
    if (row.round != 0) continue;
    costs.push_back(row.total_cost);
    latencies.push_back(row.mean_latency_ms);
  }
  REQUIRE(costs.size() == 4);
  for (const double cost : costs) {
    CHECK(cost == doctest::Approx(costs.front()).epsilon(0.05));
  }
  for (const double latency : latencies) {
    CHECK(latency == doctest::Approx(latencies.front()).epsilon(0.05));
  }
}

TEST_CASE("format_double emits shortest round-trip decimals") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-0.4) == "-0.4");
  CHECK(format_double(1e-06) == "1e-06");
  const double value = 0.30000000000000004;
  CHECK(std::stod(format_double(value)) == value);
}

TEST_CASE("dataset ingestion reads the fixture") {
  const auto entries = ingest_dataset(source_path("tests/fixtures/dataset_sample.jsonl"));
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].question == "Why is the sky blue?");
  REQUIRE(entries[0].human_answer.has_value());
  CHECK(entries[0].human_answer->rfind("Sunlight scatters", 0) == 0);
  CHECK(entries[0].topic == "open_qa");
  CHECK(entries[2].topic == "medical");
}

TEST_CASE("dataset ingestion error handling") {
  SUBCASE("missing file") {
    try {
      ingest_dataset("/nonexistent/data.jsonl");
      FAIL("expected FileNotFound");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::FileNotFound);
    }
  }

  SUBCASE("empty file") {
    const std::string path = write_temp("llmroute_empty.jsonl", "");
    CHECK(ingest_dataset(path, IngestMode::Lenient).empty());
    CHECK_THROWS_AS(ingest_dataset(path, IngestMode::Strict), Error);
  }

  SUBCASE("malformed lines are skipped with line numbers in lenient mode") {
    const std::string path = write_temp(
        "llmroute_mixed.jsonl",
        "{\"question\": \"good one?\", \"human_answers\": [\"yes\"]}\n"
        "this is not json\n"
        "{\"no_question_key\": 1}\n"
        "{\"question\": \"another?\"}\n");
    std::ostringstream warnings;
    const auto entries = ingest_dataset(path, IngestMode::Lenient, &warnings);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].question == "good one?");
    CHECK(entries[1].question == "another?");
    CHECK_FALSE(entries[1].human_answer.has_value());
    CHECK(warnings.str().find(":2:") != std::string::npos);
    CHECK(warnings.str().find(":3:") != std::string::npos);

    CHECK_THROWS_AS(ingest_dataset(path, IngestMode::Strict), Error);
  }
}

TEST_CASE("experiment specs parse from JSON") {
  const std::string text = R"json({
    "name": "tiny",
    "pool_specs": [
      {"id": "a", "cost": 0.4, "base_latency_ms": 800, "mean_quality": 0.75},
      {"id": "b", "cost": 0.8, "base_latency_ms": 3000, "mean_quality": 0.85}
    ],
    "weights": {"w_a": 0.2, "w_c": 0.6, "w_l": 0.2, "t_scaling": 3},
    "policy_grid": [
      {"label": "SLA", "policy_kind": "SLA", "beta": 0.5,
       "normalizer_mode": "running_minmax"},
      {"policy_kind": "fixed", "fixed_arm": 1}
    ],
    "num_sessions": 2,
    "queries_per_session": 50,
    "seeds": [11]
  })json";
  const ExperimentSpec spec = parse_experiment_spec_text(text);
  CHECK(spec.name == "tiny");
  CHECK(spec.pool_specs.size() == 2);
  CHECK(spec.weights.w_c == 0.6);
  CHECK(spec.policy_grid[0].label == "SLA");
  CHECK(spec.policy_grid[1].label == "fixed_1");
  CHECK(spec.policy_grid[1].config.fixed_arm == 1);
  CHECK(spec.num_sessions == 2);

  CHECK_NOTHROW(run_weight_study(spec));
}

TEST_CASE("experiment spec parsing rejects unknown fields and bad values") {
  CHECK_THROWS_AS(parse_experiment_spec_text("not json"), Error);
  CHECK_THROWS_AS(parse_experiment_spec_text("{}"), Error);

  const std::string bad_kind = R"json({
    "pool_specs": [{"id": "a"}, {"id": "b"}],
    "policy_grid": [{"policy_kind": "bandit"}]
  })json";
  CHECK_THROWS_AS(parse_experiment_spec_text(bad_kind), Error);

  const std::string bad_key = R"json({
    "pool_specs": [{"id": "a"}, {"id": "b"}],
    "policy_grid": [{"policy_kind": "SLA", "bogus": 1}]
  })json";
  CHECK_THROWS_AS(parse_experiment_spec_text(bad_key), Error);
}

TEST_CASE("live run over the fixture dataset with the oracle scorer") {
  const std::string spec_text = R"json({
    "models": [
      {"id": "m1", "cost_per_query": 0.4,
       "backend": {"type": "simulated", "base_latency_ms": 800, "mean_quality": 0.75}},
      {"id": "m2", "cost_per_query": 0.3,
       "backend": {"type": "simulated", "base_latency_ms": 600, "mean_quality": 0.65}}
    ],
    "session": {"policy_kind": "SLA", "beta": 0.5, "rng_seed": 4,
                "normalizer_mode": "running_minmax"},
    "scorer": "oracle",
    "dataset": ")json" +
                                source_path("tests/fixtures/dataset_sample.jsonl") +
                                R"json(",
    "max_queries": 3
  })json";
  LiveRunSpec spec = parse_live_run_spec_text(spec_text);
  const std::string csv = run_live_session_csv(spec);

  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line ==
        "round,model_index,model_id,raw_reward,normalized_reward,accuracy,cost,"
        "latency_ms,cumulative_cost");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);

  // Replays byte-identically.
  CHECK(run_live_session_csv(spec) == csv);
}

TEST_CASE("live run spec validation") {
  CHECK_THROWS_AS(parse_live_run_spec_text(R"({"models": []})"), Error);
  const std::string no_dataset = R"json({
    "models": [
      {"id": "a", "backend": {"type": "simulated"}},
      {"id": "b", "backend": {"type": "simulated"}}
    ]
  })json";
  CHECK_THROWS_AS(parse_live_run_spec_text(no_dataset), Error);

  const std::string judge_without_backend = R"json({
    "models": [
      {"id": "a", "backend": {"type": "simulated"}},
      {"id": "b", "backend": {"type": "simulated"}}
    ],
    "scorer": "llm_judge",
    "dataset": "x.jsonl"
  })json";
  CHECK_THROWS_AS(parse_live_run_spec_text(judge_without_backend), Error);
}
