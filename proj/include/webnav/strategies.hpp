#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webnav/environment.hpp"
#include "webnav/policy.hpp"
#include "webnav/trajectory.hpp"

namespace webnav {

enum class StrategyKind { kOneWay, kBestFirst, kRollback };

std::string_view to_string(StrategyKind kind);
std::optional<StrategyKind> strategy_from_string(std::string_view name);

inline constexpr std::size_t kDefaultMaxSteps = 16;
// BestFirst stops reselecting a state once this many distinct actions were tried from it.
inline constexpr std::size_t kBestFirstExhaustion = 3;
inline constexpr double kInitialStateValue = 3.0;

struct EpisodeInput {
  std::string task_id;
  std::string task;
  std::size_t max_steps = kDefaultMaxSteps;
};

struct RunTrace {
  std::string task_id;
  std::string strategy;
  std::vector<StepRecord> steps;
  RunCounters counters;
  std::string final_answer;  // empty unless the agent stopped
  Trajectory trajectory;
  bool failed = false;
  std::string error;
  Warnings warnings;
  std::optional<bool> goal_reached;

  bool operator==(const RunTrace&) const = default;
};

// Each loop iteration consumes one step whichever branch it takes. The
// environment is reset at the start. Environment and backend failures end the
// episode with failed = true and the partial trace kept.
RunTrace run_rollback(Environment& env, const PolicyModules& policy, const EpisodeInput& input);
RunTrace run_oneway(Environment& env, const PolicyModules& policy, const EpisodeInput& input);
RunTrace run_bestfirst(Environment& env, const PolicyModules& policy, const EpisodeInput& input);
RunTrace run_strategy(StrategyKind kind, Environment& env, const PolicyModules& policy, const EpisodeInput& input);

// A restart, or two goback actions on consecutive steps.
bool detect_struggle(const std::vector<Action>& actions);
bool detect_struggle(const RunTrace& trace);

}  // namespace webnav
