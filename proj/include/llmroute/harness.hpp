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
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "llmroute/backends.hpp"
#include "llmroute/core.hpp"
#include "llmroute/engine.hpp"

namespace llmroute {

/// One simulated arm of an experiment pool.
struct PoolArmSpec {
  std::string id;
  double cost = 0.0;
  SimulatedBackendSpec sim;
};

struct PolicyVariant {
  std::string label;
  SessionConfig config;
};

/// A full experiment: pool, reward weights, policy grid, session counts and
/// seeds. Everything an experiment produces is a pure function of this
/// struct, so re-running one yields byte-identical CSV.
struct ExperimentSpec {
  std::string name;
  std::vector<PoolArmSpec> pool_specs;
  RewardWeights weights;
  std::vector<PolicyVariant> policy_grid;
  std::uint64_t num_sessions = 10;
  std::uint64_t queries_per_session = 500;
  std::vector<std::uint64_t> seeds;  // one per session, or a single base seed
};

void validate_spec(const ExperimentSpec& spec);

/// Per-session seeds: seeds[i] when one seed is given per session, otherwise
/// seeds[0] + i.
std::vector<std::uint64_t> derive_session_seeds(const ExperimentSpec& spec);

struct BuiltPool {
  ModelPool pool;
  BackendRegistry registry;
};

BuiltPool build_simulated_pool(const std::vector<PoolArmSpec>& arms,
                               double latency_floor_ms = kDefaultLatencyFloorMs);

struct BetaSweepRow {
  double beta = 0.0;
  double mean_convergence_rounds = 0.0;
  double mean_normalized_reward = 0.0;
  double mean_post_convergence_score = 0.0;
};

struct WeightStudyRow {
  std::string policy_variant;
  std::uint64_t round = 0;
  double running_avg_cost = 0.0;
  double running_avg_latency_ms = 0.0;
  double total_cost = 0.0;
  double mean_latency_ms = 0.0;
};

// `threads`: 1 runs the serial reference loop, 0 lets OpenMP pick, any other
// value pins the worker count. Output is identical for every setting.

/// Convergence-speed study over a grid of SLA learning rates. Each session
/// learns until it pins (or hits queries_per_session), then answers 200 more
/// queries on the pinned model for the quality column.
std::vector<BetaSweepRow> run_beta_sweep(const ExperimentSpec& spec, int threads = 0);

/// Cost/latency study: every policy variant plays queries_per_session rounds
/// per session; rows hold per-round running averages and session totals,
/// averaged over seeds.
std::vector<WeightStudyRow> run_weight_study(const ExperimentSpec& spec, int threads = 0);

std::string beta_sweep_csv(const std::vector<BetaSweepRow>& rows);
std::string weight_study_csv(const std::vector<WeightStudyRow>& rows);

/// Shortest round-trip decimal representation; CSV cells never lose
/// precision and never depend on locale.
std::string format_double(double value);

struct DatasetEntry {
  std::string question;
  std::optional<std::string> human_answer;
  std::optional<std::string> topic;
};

enum class IngestMode { Lenient, Strict };

/// Reads line-delimited records with "question" and optional "human_answers"
/// keys. Lenient mode skips malformed lines, reporting them with line
/// numbers to `warnings`; strict mode throws ParseError instead.
std::vector<DatasetEntry> ingest_dataset(const std::string& path,
                                         IngestMode mode = IngestMode::Lenient,
                                         std::ostream* warnings = nullptr);

// Desk-scale defaults. Costs follow the four-model experiment pool
// [0.4, 0.8, 0.7, 0.3]; latencies and qualities are synthetic, picked to
// give the cheap arms lower quality and the expensive arms higher latency.
std::vector<PoolArmSpec> default_pool_specs();
ExperimentSpec default_beta_sweep_spec();
ExperimentSpec default_cost_study_spec();
ExperimentSpec default_latency_study_spec();

ExperimentSpec parse_experiment_spec_text(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::string& path);

/// Parses SessionConfig fields from a JSON object, starting from `defaults`.
/// Unknown keys are rejected. Used for gateway session overrides as well.
SessionConfig session_config_from_json_text(const std::string& json_text,
                                            const SessionConfig& defaults);

/// A live routing run over a dataset: real or simulated backends, oracle or
/// judge scoring, per-round CSV out.
struct LiveRunSpec {
  ModelPool pool;
  BackendRegistry registry;
  SessionConfig session;
  std::string scorer_kind = "oracle";  // "oracle" | "llm_judge"
  std::shared_ptr<Backend> judge;      // set when scorer_kind == "llm_judge"
  std::string dataset_path;
  std::uint64_t max_queries = 0;  // 0 = whole dataset
  IngestMode ingest_mode = IngestMode::Lenient;
};

LiveRunSpec parse_live_run_spec_text(const std::string& json_text);
LiveRunSpec load_live_run_spec(const std::string& path);

/// Runs the session over the dataset and returns the per-round CSV.
std::string run_live_session_csv(const LiveRunSpec& spec,
                                 std::ostream* warnings = nullptr);

}  // namespace llmroute
