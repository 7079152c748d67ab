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

#include "llmroute/harness.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "config_json.hpp"
#include "llmroute/scoring.hpp"

namespace llmroute {
namespace {

// Quality probe length after a session pins, mirroring the 200-query
// post-convergence measurement of the convergence-speed study.
constexpr std::uint64_t kPostConvergenceProbes = 200;

int resolve_threads(int threads) {
#ifdef _OPENMP
  return threads <= 0 ? omp_get_max_threads() : threads;
#else
  (void)threads;
  return 1;
#endif
}

// Runs `fn(0) .. fn(count-1)`. threads == 1 takes the plain serial loop that
// the tests use as the reference; otherwise iterations run under OpenMP.
// Results must be written to disjoint slots so both paths are equivalent.
template <typename Fn>
void parallel_for_index(std::size_t count, int threads, Fn&& fn) {
  const int workers = resolve_threads(threads);
#ifdef _OPENMP
  if (workers > 1 && count > 1) {
    std::vector<std::exception_ptr> failures(count);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      try {
        fn(static_cast<std::size_t>(i));
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
    return;
  }
#endif
  for (std::size_t i = 0; i < count; ++i) fn(i);
}

struct SessionRun {
  std::vector<SessionRecord> records;
  std::optional<std::uint64_t> pinned_round;
  std::optional<std::size_t> pinned_arm;
};

// One seeded session against a shared simulated pool. With stop_at_pin the
// learning phase ends at the pin (or the cap) and `post_rounds` further
// queries run on the pinned model; otherwise exactly `learning_rounds`
// rounds are played regardless of pinning.
SessionRun run_simulated_session(const BuiltPool& built, const SessionConfig& config,
                                 std::uint64_t seed, std::uint64_t learning_rounds,
                                 std::uint64_t post_rounds, bool stop_at_pin) {
  SessionConfig session_config = config;
  session_config.rng_seed = seed;
  Session session = make_session("sim-" + std::to_string(seed), session_config,
                                 built.pool);
  const OracleScorer scorer;

  for (std::uint64_t i = 0; i < learning_rounds; ++i) {
    if (stop_at_pin && session.pinned.has_value()) break;
    run_round(session, "q" + std::to_string(session.round()), std::nullopt,
              built.registry, scorer);
  }
  if (session.pinned.has_value()) {
    for (std::uint64_t i = 0; i < post_rounds; ++i) {
      run_round(session, "probe" + std::to_string(i), std::nullopt, built.registry,
                scorer);
    }
  }

  SessionRun run;
  run.records = std::move(session.records);
  run.pinned_round = session.pinned_round;
  run.pinned_arm = session.pinned;
  return run;
}

void append_csv_cell(std::string& out, double value) {
  out += format_double(value);
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return ec == std::errc() ? std::string(buffer, ptr) : std::string("nan");
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.pool_specs.size() < 2) {
    raise(Errc::InvalidSpec, "experiment pool needs at least 2 arms");
  }
  if (spec.policy_grid.empty()) {
    raise(Errc::InvalidSpec, "policy_grid must not be empty");
  }
  if (spec.num_sessions < 1 || spec.queries_per_session < 1) {
    raise(Errc::InvalidSpec, "num_sessions and queries_per_session must be >= 1");
  }
  if (spec.seeds.size() != 1 && spec.seeds.size() != spec.num_sessions) {
    raise(Errc::InvalidSpec, "seeds must hold 1 entry or num_sessions entries");
  }
  validate_weights(spec.weights);
  for (const auto& variant : spec.policy_grid) {
    SessionConfig config = variant.config;
    config.weights = spec.weights;
    validate_config(config, spec.pool_specs.size());
  }
}

std::vector<std::uint64_t> derive_session_seeds(const ExperimentSpec& spec) {
  std::vector<std::uint64_t> seeds(spec.num_sessions);
  for (std::uint64_t i = 0; i < spec.num_sessions; ++i) {
    seeds[i] = spec.seeds.size() == 1 ? spec.seeds[0] + i : spec.seeds[i];
  }
  return seeds;
}

BuiltPool build_simulated_pool(const std::vector<PoolArmSpec>& arms,
                               double latency_floor_ms) {
  BuiltPool built;
  for (const auto& arm : arms) {
    ModelDescriptor descriptor;
    descriptor.id = arm.id;
    descriptor.display_name = arm.id;
    descriptor.cost_per_query = arm.cost;
    descriptor.backend_ref = arm.id;
    built.registry.register_simulated(arm.id, arm.sim, latency_floor_ms);
    built.pool.models.push_back(std::move(descriptor));
  }
  validate_pool(built.pool);
  return built;
}

std::vector<BetaSweepRow> run_beta_sweep(const ExperimentSpec& spec, int threads) {
  validate_spec(spec);
  for (const auto& variant : spec.policy_grid) {
    if (variant.config.policy_kind != PolicyKind::Sla) {
      raise(Errc::InvalidSpec, "beta sweep expects an SLA-only policy grid");
    }
  }
  const BuiltPool built = build_simulated_pool(spec.pool_specs);
  const auto seeds = derive_session_seeds(spec);

  const std::size_t variants = spec.policy_grid.size();
  const std::size_t total = variants * seeds.size();
  std::vector<SessionRun> runs(total);
  parallel_for_index(total, threads, [&](std::size_t index) {
    const std::size_t v = index / seeds.size();
    const std::size_t s = index % seeds.size();
    SessionConfig config = spec.policy_grid[v].config;
    config.weights = spec.weights;
    runs[index] = run_simulated_session(built, config, seeds[s],
                                        spec.queries_per_session,
                                        kPostConvergenceProbes, true);
  });

  std::vector<BetaSweepRow> rows(variants);
  for (std::size_t v = 0; v < variants; ++v) {
    BetaSweepRow& row = rows[v];
    row.beta = spec.policy_grid[v].config.beta;
    double reward_sum = 0.0;
    double post_sum = 0.0;
    std::size_t post_sessions = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const SessionRun& run = runs[v * seeds.size() + s];
      row.mean_convergence_rounds += static_cast<double>(
          run.pinned_round.value_or(spec.queries_per_session));
      double session_reward = 0.0;
      for (const auto& record : run.records) session_reward += record.normalized_reward;
      reward_sum += session_reward / static_cast<double>(run.records.size());
      if (run.pinned_round.has_value()) {
        const std::size_t learning = static_cast<std::size_t>(*run.pinned_round) + 1;
        const std::size_t probes = run.records.size() - learning;
        if (probes > 0) {
          double probe_accuracy = 0.0;
          for (std::size_t i = learning; i < run.records.size(); ++i) {
            probe_accuracy += run.records[i].accuracy;
          }
          post_sum += probe_accuracy / static_cast<double>(probes);
          post_sessions += 1;
        }
      }
    }
    const auto n = static_cast<double>(seeds.size());
    row.mean_convergence_rounds /= n;
    row.mean_normalized_reward = reward_sum / n;
    row.mean_post_convergence_score =
        post_sessions > 0 ? post_sum / static_cast<double>(post_sessions)
                          : std::numeric_limits<double>::quiet_NaN();
  }
  return rows;
}

std::vector<WeightStudyRow> run_weight_study(const ExperimentSpec& spec, int threads) {
  validate_spec(spec);
  const BuiltPool built = build_simulated_pool(spec.pool_specs);
  const auto seeds = derive_session_seeds(spec);

  const std::size_t variants = spec.policy_grid.size();
  const std::size_t total = variants * seeds.size();
  std::vector<SessionRun> runs(total);
  parallel_for_index(total, threads, [&](std::size_t index) {
    const std::size_t v = index / seeds.size();
    const std::size_t s = index % seeds.size();
    SessionConfig config = spec.policy_grid[v].config;
    config.weights = spec.weights;
    runs[index] = run_simulated_session(built, config, seeds[s],
                                        spec.queries_per_session, 0, false);
  });

  const std::uint64_t rounds = spec.queries_per_session;
  std::vector<WeightStudyRow> rows;
  rows.reserve(variants * rounds);
  for (std::size_t v = 0; v < variants; ++v) {
    std::vector<double> avg_cost(rounds, 0.0);
    std::vector<double> avg_latency(rounds, 0.0);
    double total_cost = 0.0;
    double mean_latency = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const SessionRun& run = runs[v * seeds.size() + s];
      double latency_cum = 0.0;
      for (std::uint64_t r = 0; r < rounds; ++r) {
        const SessionRecord& record = run.records.at(r);
        latency_cum += record.latency_ms;
        avg_cost[r] += record.cumulative_cost / static_cast<double>(r + 1);
        avg_latency[r] += latency_cum / static_cast<double>(r + 1);
      }
      total_cost += run.records.back().cumulative_cost;
      mean_latency += latency_cum / static_cast<double>(rounds);
    }
    const auto n = static_cast<double>(seeds.size());
    total_cost /= n;
    mean_latency /= n;
    for (std::uint64_t r = 0; r < rounds; ++r) {
      WeightStudyRow row;
      row.policy_variant = spec.policy_grid[v].label;
      row.round = r;
      row.running_avg_cost = avg_cost[r] / n;
      row.running_avg_latency_ms = avg_latency[r] / n;
      row.total_cost = total_cost;
      row.mean_latency_ms = mean_latency;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string beta_sweep_csv(const std::vector<BetaSweepRow>& rows) {
  std::string out =
      "beta,mean_convergence_rounds,mean_normalized_reward,mean_post_convergence_score\n";
  for (const auto& row : rows) {
    append_csv_cell(out, row.beta);
    out += ',';
    append_csv_cell(out, row.mean_convergence_rounds);
    out += ',';
    append_csv_cell(out, row.mean_normalized_reward);
    out += ',';
    append_csv_cell(out, row.mean_post_convergence_score);
    out += '\n';
  }
  return out;
}

std::string weight_study_csv(const std::vector<WeightStudyRow>& rows) {
  std::string out =
      "policy_variant,round,running_avg_cost,running_avg_latency_ms,total_cost,mean_latency_ms\n";
  for (const auto& row : rows) {
    out += row.policy_variant;
    out += ',';
    out += std::to_string(row.round);
    out += ',';
    append_csv_cell(out, row.running_avg_cost);
    out += ',';
    append_csv_cell(out, row.running_avg_latency_ms);
    out += ',';
    append_csv_cell(out, row.total_cost);
    out += ',';
    append_csv_cell(out, row.mean_latency_ms);
    out += '\n';
  }
  return out;
}

std::vector<DatasetEntry> ingest_dataset(const std::string& path, IngestMode mode,
                                         std::ostream* warnings) {
  if (!std::filesystem::exists(path)) {
    raise(Errc::FileNotFound, "no such dataset: " + path);
  }
  std::ifstream in(path);
  std::vector<DatasetEntry> entries;
  std::string line;
  std::size_t line_number = 0;
  const auto reject = [&](const std::string& reason) {
    const std::string message =
        path + ":" + std::to_string(line_number) + ": " + reason;
    if (mode == IngestMode::Strict) raise(Errc::ParseError, message);
    if (warnings != nullptr) *warnings << "warning: skipping " << message << "\n";
  };

  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      reject("line is not a JSON object");
      continue;
    }
    if (!record.contains("question") || !record.at("question").is_string() ||
        record.at("question").get<std::string>().empty()) {
      reject("record has no usable \"question\"");
      continue;
    }
    DatasetEntry entry;
    entry.question = record.at("question").get<std::string>();
    if (record.contains("human_answers") && record.at("human_answers").is_array() &&
        !record.at("human_answers").empty() &&
        record.at("human_answers").at(0).is_string()) {
      entry.human_answer = record.at("human_answers").at(0).get<std::string>();
    }
    if (record.contains("topic") && record.at("topic").is_string()) {
      entry.topic = record.at("topic").get<std::string>();
    } else if (record.contains("source") && record.at("source").is_string()) {
      entry.topic = record.at("source").get<std::string>();
    }
    entries.push_back(std::move(entry));
  }
  if (entries.empty() && mode == IngestMode::Strict) {
    raise(Errc::ParseError, path + ": dataset is empty");
  }
  return entries;
}

std::vector<PoolArmSpec> default_pool_specs() {
  const double costs[] = {0.4, 0.8, 0.7, 0.3};
  const double latencies[] = {800.0, 3000.0, 2500.0, 600.0};
  const double qualities[] = {0.75, 0.85, 0.82, 0.65};
  std::vector<PoolArmSpec> arms(4);
  for (std::size_t i = 0; i < 4; ++i) {
    arms[i].id = "m" + std::to_string(i + 1);
    arms[i].cost = costs[i];
    arms[i].sim.base_latency_ms = latencies[i];
    arms[i].sim.latency_jitter = 0.1;
    arms[i].sim.mean_quality = qualities[i];
    arms[i].sim.quality_jitter = 0.05;
  }
  return arms;
}

namespace {

SessionConfig study_session_defaults() {
  SessionConfig config;
  config.normalizer_mode = NormalizerMode::RunningMinMax;
  config.convergence_delta = 1e-4;
  return config;
}

std::vector<PolicyVariant> study_policy_grid(const std::vector<PoolArmSpec>& pool) {
  std::size_t most_expensive = 0;
  for (std::size_t i = 1; i < pool.size(); ++i) {
    if (pool[i].cost > pool[most_expensive].cost) most_expensive = i;
  }
  const SessionConfig base = study_session_defaults();

  PolicyVariant sla{"SLA", base};
  sla.config.policy_kind = PolicyKind::Sla;
  sla.config.beta = 0.5;

  PolicyVariant ql{"QL_eps0.1", base};
  ql.config.policy_kind = PolicyKind::Ql;
  ql.config.theta = 0.7;
  ql.config.explore_epsilon = 0.1;

  PolicyVariant fixed{"fixed_most_expensive", base};
  fixed.config.policy_kind = PolicyKind::FixedArm;
  fixed.config.fixed_arm = most_expensive;

  PolicyVariant random{"uniform_random", base};
  random.config.policy_kind = PolicyKind::UniformRandom;

  return {sla, ql, fixed, random};
}

}  // namespace

ExperimentSpec default_beta_sweep_spec() {
  ExperimentSpec spec;
  spec.name = "beta_sweep";
  spec.pool_specs = default_pool_specs();
  spec.weights = RewardWeights{0.5, 0.25, 0.25, 3.0};
  for (const double beta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    PolicyVariant variant{"beta=" + format_double(beta), study_session_defaults()};
    variant.config.policy_kind = PolicyKind::Sla;
    variant.config.beta = beta;
    spec.policy_grid.push_back(std::move(variant));
  }
  spec.num_sessions = 10;
  spec.queries_per_session = 1000;  // room for the slow beta=0.1 sessions
  spec.seeds = {12345};
  return spec;
}

ExperimentSpec default_cost_study_spec() {
  ExperimentSpec spec;
  spec.name = "cost_study";
  spec.pool_specs = default_pool_specs();
  spec.weights = RewardWeights{0.2, 0.6, 0.2, 3.0};
  spec.policy_grid = study_policy_grid(spec.pool_specs);
  spec.num_sessions = 10;
  spec.queries_per_session = 500;
  spec.seeds = {20240};
  return spec;
}

ExperimentSpec default_latency_study_spec() {
  ExperimentSpec spec = default_cost_study_spec();
  spec.name = "latency_study";
  spec.weights = RewardWeights{0.2, 0.2, 0.6, 3.0};
  return spec;
}

ExperimentSpec parse_experiment_spec_text(const std::string& json_text) {
  const nlohmann::json obj = detail::parse_json_text(json_text, "experiment spec");
  ExperimentSpec spec;
  spec.name = obj.value("name", std::string("experiment"));
  if (!obj.contains("pool_specs") || !obj.at("pool_specs").is_array()) {
    raise(Errc::InvalidSpec, "spec needs a \"pool_specs\" array");
  }
  for (const auto& entry : obj.at("pool_specs")) {
    PoolArmSpec arm;
    arm.id = entry.value("id", std::string());
    if (arm.id.empty()) raise(Errc::InvalidSpec, "pool arm needs a nonempty \"id\"");
    arm.cost = entry.value("cost", 0.0);
    arm.sim.base_latency_ms = entry.value("base_latency_ms", arm.sim.base_latency_ms);
    arm.sim.latency_jitter = entry.value("latency_jitter", arm.sim.latency_jitter);
    arm.sim.mean_quality = entry.value("mean_quality", arm.sim.mean_quality);
    arm.sim.quality_jitter = entry.value("quality_jitter", arm.sim.quality_jitter);
    arm.sim.canned_text = entry.value("canned_text", arm.sim.canned_text);
    spec.pool_specs.push_back(std::move(arm));
  }
  if (obj.contains("weights")) {
    spec.weights = detail::weights_from_json(obj.at("weights"), spec.weights);
  }
  if (!obj.contains("policy_grid") || !obj.at("policy_grid").is_array()) {
    raise(Errc::InvalidSpec, "spec needs a \"policy_grid\" array");
  }
  std::size_t variant_index = 0;
  for (const auto& entry : obj.at("policy_grid")) {
    PolicyVariant variant;
    variant.config = detail::session_config_from_json(entry, study_session_defaults());
    variant.label = entry.value(
        "label", std::string(policy_kind_name(variant.config.policy_kind)) + "_" +
                     std::to_string(variant_index));
    spec.policy_grid.push_back(std::move(variant));
    ++variant_index;
  }
  spec.num_sessions = obj.value("num_sessions", spec.num_sessions);
  spec.queries_per_session = obj.value("queries_per_session", spec.queries_per_session);
  if (obj.contains("seeds")) {
    spec.seeds = obj.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (spec.seeds.empty()) spec.seeds = {1};
  validate_spec(spec);
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  const nlohmann::json obj = detail::load_json_file(path);
  return parse_experiment_spec_text(obj.dump());
}

SessionConfig session_config_from_json_text(const std::string& json_text,
                                            const SessionConfig& defaults) {
  const nlohmann::json obj = detail::parse_json_text(json_text, "session config");
  return detail::session_config_from_json(obj, defaults);
}

LiveRunSpec parse_live_run_spec_text(const std::string& json_text) {
  const nlohmann::json obj = detail::parse_json_text(json_text, "live run spec");
  LiveRunSpec spec;
  SessionConfig defaults;
  if (obj.contains("session")) {
    defaults = detail::session_config_from_json(obj.at("session"), defaults);
  }
  spec.session = defaults;
  if (!obj.contains("models")) {
    raise(Errc::InvalidSpec, "live run spec needs a \"models\" array");
  }
  BuiltPool built =
      detail::pool_from_json(obj.at("models"), spec.session.latency_floor_ms);
  spec.pool = std::move(built.pool);
  spec.registry = std::move(built.registry);
  spec.scorer_kind = obj.value("scorer", spec.scorer_kind);
  if (spec.scorer_kind == "llm_judge") {
    if (!obj.contains("judge_backend")) {
      raise(Errc::InvalidSpec, "llm_judge scoring needs a \"judge_backend\"");
    }
    spec.judge = detail::backend_from_json(obj.at("judge_backend"), "judge",
                                           spec.session.latency_floor_ms);
  } else if (spec.scorer_kind != "oracle") {
    raise(Errc::InvalidSpec, "unknown scorer '" + spec.scorer_kind + "'");
  }
  spec.dataset_path = obj.value("dataset", std::string());
  if (spec.dataset_path.empty()) {
    raise(Errc::InvalidSpec, "live run spec needs a \"dataset\" path");
  }
  spec.max_queries = obj.value("max_queries", spec.max_queries);
  spec.ingest_mode =
      obj.value("strict_dataset", false) ? IngestMode::Strict : IngestMode::Lenient;
  return spec;
}

LiveRunSpec load_live_run_spec(const std::string& path) {
  const nlohmann::json obj = detail::load_json_file(path);
  return parse_live_run_spec_text(obj.dump());
}

std::string run_live_session_csv(const LiveRunSpec& spec, std::ostream* warnings) {
  const auto entries = ingest_dataset(spec.dataset_path, spec.ingest_mode, warnings);
  std::unique_ptr<Scorer> scorer;
  if (spec.scorer_kind == "llm_judge") {
    scorer = std::make_unique<JudgeScorer>(spec.judge);
  } else {
    scorer = std::make_unique<OracleScorer>();
  }

  Session session = make_session("live", spec.session, spec.pool);
  std::uint64_t executed = 0;
  for (const auto& entry : entries) {
    if (spec.max_queries != 0 && executed >= spec.max_queries) break;
    run_round(session, entry.question, entry.human_answer, spec.registry, *scorer);
    ++executed;
  }

  std::string out =
      "round,model_index,model_id,raw_reward,normalized_reward,accuracy,cost,"
      "latency_ms,cumulative_cost\n";
  for (const auto& record : session.records) {
    out += std::to_string(record.round);
    out += ',';
    out += std::to_string(record.model_index);
    out += ',';
    out += session.pool.arm(record.model_index).id;
    out += ',';
    append_csv_cell(out, record.raw_reward);
    out += ',';
    append_csv_cell(out, record.normalized_reward);
    out += ',';
    append_csv_cell(out, record.accuracy);
    out += ',';
    append_csv_cell(out, record.cost);
    out += ',';
    append_csv_cell(out, record.latency_ms);
    out += ',';
    append_csv_cell(out, record.cumulative_cost);
    out += '\n';
  }
  return out;
}

}  // namespace llmroute
