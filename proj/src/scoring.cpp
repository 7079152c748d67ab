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

#include "llmroute/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>

namespace llmroute {
namespace {

// Keep in sync with templates/judge_prompt.tmpl; a test pins the two to the
// same bytes.
constexpr std::string_view kJudgePromptTemplate =
    "[System]\n"
    "Please act as an impartial judge and evaluate the quality of the response "
    "provided by an AI assistant to the user question displayed below. We provide "
    "also a human generated response to use as guidance for your scoring. Rate the "
    "response on a scale of 0 to 1 with three decimal accuracy by strictly "
    "returning just one number, for example: \"0.345\".\n"
    "\n"
    "[User Question]\n"
    "{question}\n"
    "\n"
    "[AI Response]\n"
    "{ai_response}\n"
    "\n"
    "[Human Response:]\n"
    "{human_response}\n";

constexpr std::string_view kMissingReference = "No reference answer available.";

void replace_once(std::string& text, std::string_view placeholder, std::string_view value) {
  const std::size_t pos = text.find(placeholder);
  text.replace(pos, placeholder.size(), value);
}

std::string_view trim(std::string_view text) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::optional<double> parse_decimal_01(std::string_view token) {
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::fixed);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  if (!(value >= 0.0 && value <= 1.0)) return std::nullopt;
  return value;
}

}  // namespace

std::string_view judge_prompt_template() { return kJudgePromptTemplate; }

std::string render_judge_prompt(const ScoreRequest& request) {
  std::string prompt(kJudgePromptTemplate);
  replace_once(prompt, "{question}", request.question);
  replace_once(prompt, "{ai_response}", request.ai_response);
  replace_once(prompt, "{human_response}",
               request.human_response ? std::string_view(*request.human_response)
                                      : kMissingReference);
  return prompt;
}

double parse_judge_reply(std::string_view reply) {
  // Strict: the entire trimmed reply is the number.
  if (const auto value = parse_decimal_01(trim(reply))) return *value;

  // Fallback: lone decimal on the first line, quotes tolerated.
  static const std::regex first_line_decimal(
      R"re(^"?(0(\.[0-9]+)?|1(\.0+)?|\.[0-9]+)"?$)re");
  const std::size_t eol = reply.find('\n');
  const std::string first_line(
      trim(eol == std::string_view::npos ? reply : reply.substr(0, eol)));
  std::smatch match;
  if (std::regex_match(first_line, match, first_line_decimal)) {
    if (const auto value = parse_decimal_01(match[1].str())) return *value;
  }

  std::string preview(reply.substr(0, std::min<std::size_t>(reply.size(), 80)));
  raise(Errc::JudgeUnparseable, "judge reply is not a lone decimal in [0, 1]: '" +
                                    preview + "'");
}

Score OracleScorer::score(const ScoreRequest&, const BackendResponse& response,
                          RngStream&) const {
  if (!response.drawn_quality.has_value()) {
    raise(Errc::MissingQualityMetadata,
          "response from '" + response.backend_id +
              "' carries no quality metadata; the oracle scorer only works "
              "with simulated backends");
  }
  return Score{std::clamp(*response.drawn_quality, kScoreFloor, 1.0), id_};
}

JudgeScorer::JudgeScorer(std::shared_ptr<Backend> judge) : judge_(std::move(judge)) {
  if (judge_ == nullptr) {
    raise(Errc::InvalidConfig, "judge scorer needs a judge backend");
  }
  id_ = "llm_judge:" + judge_->id();
}

Score JudgeScorer::score(const ScoreRequest& request, const BackendResponse&,
                         RngStream& rng) const {
  QueryRequest judge_request;
  judge_request.session_id = "judge";
  judge_request.prompt = render_judge_prompt(request);
  const BackendResponse reply = judge_->execute(judge_request, rng);
  const double value = parse_judge_reply(reply.text);
  return Score{std::max(value, kScoreFloor), id_};
}

}  // namespace llmroute
