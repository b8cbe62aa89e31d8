#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "webnav/backend.hpp"
#include "webnav/environment.hpp"
#include "webnav/prompts.hpp"
#include "webnav/trajectory.hpp"

namespace webnav {

struct PolicySettings {
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::string model_id;
};

struct ActionDecision {
  std::string thought;
  Action action;
  Warnings warnings;
};

struct RollbackPlan {
  RollbackDecision decision;  // back_idx already resolved to `target`
  std::size_t target = 0;
  ExperienceNote note;
  Warnings warnings;
};

// Slot builders, exposed so golden tests can render without a backend.
SlotValues action_slots(const std::string& task, const Trajectory& traj, const Observation& obs);
SlotValues critique_slots(const std::string& task, const Trajectory& traj, const Observation& prev_obs,
                          const Action& action, const Observation& new_obs);
SlotValues rollback_slots(const std::string& task, const Trajectory& traj, const Action& action,
                          const CritiqueVerdict& verdict);

// Resolves a requested revert index against the checkpoints of `traj`:
// clamps to the last state, then snaps down to the nearest checkpoint.
std::size_t resolve_back_index(const Trajectory& traj, long requested, Warnings* warnings);

// Action, critique and rollback modules over one backend. Holds no episode
// state, so one instance may serve concurrent episodes.
class PolicyModules {
 public:
  explicit PolicyModules(Backend& backend, PolicySettings settings = {})
      : backend_(&backend), settings_(std::move(settings)) {}

  // Never returns an action already listed in the current state's tryings.
  ActionDecision decide_action(const std::string& task, const Trajectory& traj, const Observation& obs) const;

  // verdict.details is filled from the observation head when the model left it empty.
  CritiqueVerdict critique(const std::string& task, const Trajectory& traj, const Observation& prev_obs,
                           const Action& action, const Observation& new_obs, Warnings& warnings) const;

  // `t` is the zero-based loop iteration. Pure: the caller applies the plan
  // with commit_rollback once the environment has reverted.
  RollbackPlan decide_rollback(const std::string& task, const Trajectory& traj, const Action& action,
                               const CritiqueVerdict& verdict, std::size_t t) const;

  Backend& backend() const { return *backend_; }
  const PolicySettings& settings() const { return settings_; }

  std::string ask(Role role, const std::string& prompt) const;

 private:
  Backend* backend_;
  PolicySettings settings_;
};

// Slices the trajectory, records the experience, and marks the action taken
// out of the target state as tried there.
void commit_rollback(Trajectory& traj, const RollbackPlan& plan, const Action& latest_action);

}  // namespace webnav
