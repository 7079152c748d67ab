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
#include <optional>
#include <string>
#include <string_view>

#include "llmroute/backends.hpp"
#include "llmroute/core.hpp"

namespace llmroute {

// Scores of exactly 0 are floored here so the accuracy range stays open at 0.
inline constexpr double kScoreFloor = 1e-6;

struct ScoreRequest {
  std::string question;
  std::string ai_response;
  std::optional<std::string> human_response;
};

struct Score {
  double value = 0.0;  // in (0, 1]
  std::string scorer_id;
};

/// Renders the judge prompt for one request. Byte-stable: identical requests
/// produce identical prompts. A missing reference answer is rendered as the
/// literal line "No reference answer available.".
std::string render_judge_prompt(const ScoreRequest& request);

/// The prompt template with {question} / {ai_response} / {human_response}
/// placeholders, identical to templates/judge_prompt.tmpl.
std::string_view judge_prompt_template();

/// Parses a judge reply into a decimal in [0, 1]. Strict parse first: the
/// whole trimmed reply must be the number. One fallback is allowed before
/// failing: the trimmed first line with optional surrounding double quotes
/// stripped, matched against ^"?(0(\.[0-9]+)?|1(\.0+)?|\.[0-9]+)"?$.
/// Anything else throws JudgeUnparseable.
double parse_judge_reply(std::string_view reply);

/// Accuracy scorers. Stateless: safe to share across concurrent sessions.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual Score score(const ScoreRequest& request, const BackendResponse& response,
                      RngStream& rng) const = 0;
  virtual const std::string& id() const = 0;
};

/// Reads the true quality a simulated backend stamped into its response.
/// Fails with MissingQualityMetadata when handed a live response.
class OracleScorer final : public Scorer {
 public:
  Score score(const ScoreRequest& request, const BackendResponse& response,
              RngStream& rng) const override;
  const std::string& id() const override { return id_; }

 private:
  std::string id_ = "oracle";
};

/// Sends the rendered judge prompt to a judge backend and parses the reply.
class JudgeScorer final : public Scorer {
 public:
  explicit JudgeScorer(std::shared_ptr<Backend> judge);

  Score score(const ScoreRequest& request, const BackendResponse& response,
              RngStream& rng) const override;
  const std::string& id() const override { return id_; }

 private:
  std::shared_ptr<Backend> judge_;
  std::string id_;
};

}  // namespace llmroute
