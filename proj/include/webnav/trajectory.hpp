#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "webnav/action.hpp"
#include "webnav/responses.hpp"

namespace webnav {

// One visited browser state.
struct NavState {
  std::size_t index = 0;
  std::string url;
  std::string obs_digest;
  std::optional<Action> action_taken;  // empty for the initial state
  bool checkpoint = false;
  std::set<std::string> tried_actions;  // serialized actions attempted from here

  bool operator==(const NavState&) const = default;
};

// Lesson recorded when the agent reverts. created_at_step is the 1-based
// number of loop iterations executed at the time of the note.
struct ExperienceNote {
  std::size_t created_at_step = 0;
  std::size_t returned_to_index = 0;
  std::string text;

  bool operator==(const ExperienceNote&) const = default;
};

// Checkpoint rule: any state whose URL was captured is a legal revert target.
inline bool is_checkpoint_url(const std::string& url) { return !url.empty(); }

class Trajectory {
 public:
  const std::vector<NavState>& states() const { return states_; }
  const std::vector<ExperienceNote>& experiences() const { return experiences_; }
  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const NavState& at(std::size_t i) const;
  const NavState& back() const;

  // Throws ContractViolation unless state.index == size().
  void append_state(NavState state);

  // S <- S[:i+1]. Throws IndexError when i >= size(), InvalidTargetError when
  // states[i] is not a checkpoint. Experiences are kept.
  void rollback_to(std::size_t i);

  // Idempotent. Throws IndexError when i >= size().
  void record_tried_action(std::size_t i, const Action& action);

  // Throws ContractViolation when note.returned_to_index >= note.created_at_step.
  void add_experience(ExperienceNote note);

  bool operator==(const Trajectory&) const = default;

 private:
  std::vector<NavState> states_;
  std::vector<ExperienceNote> experiences_;
};

// "Step i | action: ... | url: ... | observation: ..." one line per state.
std::string render_trace_review(const Trajectory& traj);

// "<i> action: ... | url: ... | observation: ... [Checkpoint Saved]".
std::string render_indexed_trace(const Trajectory& traj);

inline constexpr const char* kCheckpointMarker = "[Checkpoint Saved]";

// One loop iteration of an episode.
struct StepRecord {
  std::size_t t = 0;
  std::string thought;
  Action action;
  std::optional<CritiqueVerdict> critique;
  std::optional<RollbackDecision> rollback;
  bool switched = false;  // the recorded rollback was carried out by the environment
  std::string url;        // environment URL at the end of the iteration

  bool operator==(const StepRecord&) const = default;
};

struct RunCounters {
  std::size_t steps_used = 0;
  std::size_t switches = 0;
  bool stopped = false;

  bool operator==(const RunCounters&) const = default;
};

}  // namespace webnav
