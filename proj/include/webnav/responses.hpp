#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "webnav/action.hpp"
#include "webnav/expected.hpp"

namespace webnav {

enum class Decision { kContinue, kBack };

std::string_view to_string(Decision d);

// Structured reply of the critique module. score is always a multiple of 0.5
// within [1.0, 5.0] once parsed.
struct CritiqueVerdict {
  std::string observation;
  std::string details;
  std::string critic;
  double score = 3.0;
  Decision decision = Decision::kContinue;
  bool operator==(const CritiqueVerdict&) const = default;
};

struct RollbackDecision {
  std::string analysis;
  int back_idx = 0;
  std::string experience;
  bool operator==(const RollbackDecision&) const = default;
};

struct EvalResult {
  std::string summary;
  std::string thought;
  std::string criteria;
  double score = 0.0;
  bool operator==(const EvalResult&) const = default;
};

using Warnings = std::vector<std::string>;

inline constexpr double kMinCritiqueScore = 1.0;
inline constexpr double kMaxCritiqueScore = 5.0;

// Clamps to [1.0, 5.0] and rounds to the nearest 0.5.
double snap_critique_score(double raw);

// All parsers are total. Recoverable defects (clamped scores) are appended to
// `warnings` when it is non-null.
Expected<CritiqueVerdict, ParseError> parse_critique(std::string_view raw, Warnings* warnings = nullptr);
Expected<RollbackDecision, ParseError> parse_rollback(std::string_view raw, Warnings* warnings = nullptr);
Expected<EvalResult, ParseError> parse_eval(std::string_view raw, Warnings* warnings = nullptr);

}  // namespace webnav
