#include "webnav/responses.hpp"

#include <cmath>

#include "text_util.hpp"

namespace webnav {
namespace {

using detail::trim;

void warn(Warnings* warnings, std::string message) {
  if (warnings != nullptr) warnings->push_back(std::move(message));
}

std::string field_or_empty(std::string_view raw, std::string_view label) {
  return find_field(raw, label).value_or("");
}

std::string normalize_word(std::string_view s) {
  s = trim(s);
  auto strip = [](char c) { return c == '`' || c == '"' || c == '\'' || c == '.' || c == '*' || c == '[' || c == ']'; };
  while (!s.empty() && strip(s.front())) s.remove_prefix(1);
  while (!s.empty() && strip(s.back())) s.remove_suffix(1);
  return detail::to_lower(trim(s));
}

std::string format_score(double v) {
  std::string s = std::to_string(v);
  return s;
}

}  // namespace

std::string_view to_string(Decision d) { return d == Decision::kBack ? "back" : "continue"; }

double snap_critique_score(double raw) {
  if (!std::isfinite(raw)) return 3.0;
  double clamped = std::fmin(kMaxCritiqueScore, std::fmax(kMinCritiqueScore, raw));
  return std::round(clamped * 2.0) / 2.0;
}

Expected<CritiqueVerdict, ParseError> parse_critique(std::string_view raw, Warnings* warnings) {
  auto action = find_field(raw, "Action");
  if (!action) return ParseError{ParseError::Kind::kUnparseableCritique, "critique reply has no Action line"};

  CritiqueVerdict verdict;
  const std::string word = normalize_word(*action);
  if (word == "continue") {
    verdict.decision = Decision::kContinue;
  } else if (word == "back" || word == "rollback" || word == "go back") {
    verdict.decision = Decision::kBack;
  } else {
    return ParseError{ParseError::Kind::kUnparseableCritique,
                      "critique Action must be 'continue' or 'back', got '" + std::string(trim(*action)).substr(0, 64) + "'"};
  }

  verdict.observation = field_or_empty(raw, "Observation");
  verdict.details = field_or_empty(raw, "Details");
  verdict.critic = field_or_empty(raw, "Critic");

  auto score_text = find_field(raw, "Score");
  auto score = score_text ? detail::parse_leading_double(*score_text) : std::nullopt;
  if (!score || !std::isfinite(*score)) {
    warn(warnings, "critique score missing or non-numeric; using 3.0");
    verdict.score = 3.0;
  } else {
    verdict.score = snap_critique_score(*score);
    if (*score < kMinCritiqueScore || *score > kMaxCritiqueScore) {
      warn(warnings, "critique score " + format_score(*score) + " out of range; clamped to " + format_score(verdict.score));
    } else if (verdict.score != *score) {
      warn(warnings, "critique score " + format_score(*score) + " snapped to " + format_score(verdict.score));
    }
  }
  return verdict;
}

Expected<RollbackDecision, ParseError> parse_rollback(std::string_view raw, Warnings* /*warnings*/) {
  auto field = find_field(raw, "BackIdx");
  if (!field) return ParseError{ParseError::Kind::kUnparseableRollback, "rollback reply has no BackIdx line"};

  std::string_view value = trim(*field);
  std::optional<int> idx;
  for (auto open = value.find('<'); open != std::string_view::npos && !idx; open = value.find('<', open + 1)) {
    auto close = value.find('>', open);
    if (close == std::string_view::npos) break;
    idx = detail::parse_non_negative_int(value.substr(open + 1, close - open - 1));
  }
  if (!idx) {
    auto bare = value;
    while (!bare.empty() && (bare.front() == '`' || bare.front() == '"' || bare.front() == '*')) bare.remove_prefix(1);
    std::size_t digits = 0;
    while (digits < bare.size() && std::isdigit(static_cast<unsigned char>(bare[digits]))) ++digits;
    if (digits > 0) idx = detail::parse_non_negative_int(bare.substr(0, digits));
  }
  if (!idx) {
    return ParseError{ParseError::Kind::kUnparseableRollback,
                      "BackIdx is not an index: '" + std::string(value.substr(0, 64)) + "'"};
  }
  RollbackDecision decision;
  decision.back_idx = *idx;
  decision.analysis = field_or_empty(raw, "Analysis");
  decision.experience = field_or_empty(raw, "Experience");
  return decision;
}

Expected<EvalResult, ParseError> parse_eval(std::string_view raw, Warnings* warnings) {
  auto score_text = find_field(raw, "Score");
  if (!score_text) return ParseError{ParseError::Kind::kUnparseableEval, "evaluation reply has no Score line"};
  auto score = detail::parse_leading_double(*score_text);
  if (!score || std::isnan(*score)) {
    return ParseError{ParseError::Kind::kUnparseableEval,
                      "evaluation Score is not a number: '" + score_text->substr(0, 64) + "'"};
  }
  EvalResult result;
  result.score = std::fmin(1.0, std::fmax(0.0, *score));
  if (result.score != *score) {
    warn(warnings, "evaluation score " + format_score(*score) + " clamped to " + format_score(result.score));
  }
  result.summary = field_or_empty(raw, "Summary");
  result.thought = field_or_empty(raw, "Thought");
  result.criteria = field_or_empty(raw, "Criteria");
  return result;
}

}  // namespace webnav
