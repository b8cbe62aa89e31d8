#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "webnav/backend.hpp"

namespace webnav {

// Section headers. Each sits on its own line with the section body below it,
// and sections are separated by a blank line, so extract_section() can address
// any of them.
namespace headers {
inline constexpr std::string_view kTask = "Target Task";
inline constexpr std::string_view kTraceReview = "Previous Trace Review";
inline constexpr std::string_view kExperience = "Experience";
inline constexpr std::string_view kTryings = "Previous Tryings";
inline constexpr std::string_view kAxtree = "Accessibility Tree";
inline constexpr std::string_view kPrevObservation = "Previous Observation";
inline constexpr std::string_view kActionToEvaluate = "Action to Evaluate";
inline constexpr std::string_view kNewObservation = "New Observation";
inline constexpr std::string_view kIndexedTrace = "Previous Trace";
inline constexpr std::string_view kRecentAction = "Most Recent Action";
inline constexpr std::string_view kCritic = "Critic";
inline constexpr std::string_view kEvalTask = "Here is the Task:";
inline constexpr std::string_view kEvalTrajectory = "Here is the Navigation Trajectory:";
inline constexpr std::string_view kEvalResponse = "Here is the Predicted Response:";
inline constexpr std::string_view kEvalGold = "Here is the Gold Information:";
}  // namespace headers

// Placeholder for empty sections and absent answers.
inline constexpr std::string_view kNone = "None";
inline constexpr std::string_view kNotAvailable = "N/A";

struct PromptTemplate {
  Role role;
  std::string_view text;                 // slots written as {{name}}
  std::vector<std::string_view> slots;   // every slot the text uses
};

const PromptTemplate& action_template();
const PromptTemplate& critique_template();
const PromptTemplate& rollback_template();
const PromptTemplate& eval_template();
const PromptTemplate& template_for(Role role);

using SlotValues = std::map<std::string, std::string, std::less<>>;

// Substitutes every {{slot}}. Empty values render as "None". Throws
// ContractViolation when a slot has no value or a value names an unknown slot.
std::string render_prompt(const PromptTemplate& tmpl, const SlotValues& values);

// Appended to a prompt when the previous reply could not be parsed.
std::string format_reminder(Role role, std::string_view problem);

}  // namespace webnav
