#include "webnav/policy.hpp"

#include <algorithm>

#include "text_util.hpp"
#include "webnav/errors.hpp"

namespace webnav {

namespace {

std::string bullet_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += '\n';
    out += "- " + item;
  }
  return out;
}

// Tried when the model fails twice; the first one not yet tried wins. Stop is
// last because it ends the episode.
const Action kFallbacks[] = {Wait{}, ScrollDown{}, ScrollUp{}, GoBack{}, Restart{}};

}  // namespace

SlotValues action_slots(const std::string& task, const Trajectory& traj, const Observation& obs) {
  std::vector<std::string> experiences;
  for (const auto& e : traj.experiences()) experiences.push_back(e.text);
  std::vector<std::string> tryings;
  if (!traj.empty()) tryings.assign(traj.back().tried_actions.begin(), traj.back().tried_actions.end());
  return {{"task", task},
          {"trace_review", render_trace_review(traj)},
          {"experience", bullet_list(experiences)},
          {"tryings", bullet_list(tryings)},
          {"axtree", observation_text(obs)}};
}

SlotValues critique_slots(const std::string& task, const Trajectory& traj, const Observation& prev_obs,
                          const Action& action, const Observation& new_obs) {
  return {{"task", task},
          {"trace_review", render_trace_review(traj)},
          {"prev_axtree", observation_text(prev_obs)},
          {"action", serialize_action(action)},
          {"new_axtree", observation_text(new_obs)}};
}

SlotValues rollback_slots(const std::string& task, const Trajectory& traj, const Action& action,
                          const CritiqueVerdict& verdict) {
  return {{"task", task},
          {"indexed_trace", render_indexed_trace(traj)},
          {"recent_action", serialize_action(action)},
          {"critic", verdict.critic}};
}

std::size_t resolve_back_index(const Trajectory& traj, long requested, Warnings* warnings) {
  if (traj.empty()) throw ContractViolation("cannot revert an empty trajectory");
  const auto last = static_cast<long>(traj.size()) - 1;
  long idx = requested;
  if (idx < 0 || idx > last) {
    if (warnings) {
      warnings->push_back("revert index " + std::to_string(requested) + " out of range, using " +
                          std::to_string(idx < 0 ? 0 : last));
    }
    idx = idx < 0 ? 0 : last;
  }
  long snapped = idx;
  while (snapped > 0 && !traj.at(static_cast<std::size_t>(snapped)).checkpoint) --snapped;
  if (!traj.at(static_cast<std::size_t>(snapped)).checkpoint) {
    throw ContractViolation("trajectory has no checkpoint at or before index " + std::to_string(idx));
  }
  if (snapped != idx && warnings) {
    warnings->push_back("state " + std::to_string(idx) + " is not a checkpoint, using " + std::to_string(snapped));
  }
  return static_cast<std::size_t>(snapped);
}

std::string PolicyModules::ask(Role role, const std::string& prompt) const {
  ChatRequest req;
  req.role = role;
  req.prompt = prompt;
  req.temperature = settings_.temperature;
  req.max_output_tokens = settings_.max_output_tokens;
  req.model_id = settings_.model_id;
  return backend_->complete(req);
}

ActionDecision PolicyModules::decide_action(const std::string& task, const Trajectory& traj,
                                            const Observation& obs) const {
  const std::string prompt = render_prompt(action_template(), action_slots(task, traj, obs));
  static const std::set<std::string> kNoTryings;
  const auto& tried = traj.empty() ? kNoTryings : traj.back().tried_actions;

  ActionDecision out;
  std::string problem;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto reply = ask(Role::kAction, attempt == 0 ? prompt : prompt + format_reminder(Role::kAction, problem));
    auto parsed = parse_action(reply);
    if (!parsed) {
      problem = parsed.error().message;
    } else if (tried.count(serialize_action(*parsed)) != 0) {
      problem = "'" + serialize_action(*parsed) + "' is listed under Previous Tryings";
    } else {
      out.action = std::move(*parsed);
      auto thought = find_field(reply, "Thought");
      if (!thought || thought->empty()) thought = find_field(reply, "FirstThought");
      out.thought = thought.value_or("");
      return out;
    }
  }
  out.action = Stop{std::string(kNotAvailable), "no usable action could be obtained"};
  for (const auto& a : kFallbacks) {
    if (tried.count(serialize_action(a)) == 0) {
      out.action = a;
      break;
    }
  }
  out.warnings.push_back("action module failed twice (" + problem + "); forced '" + serialize_action(out.action) + "'");
  return out;
}

CritiqueVerdict PolicyModules::critique(const std::string& task, const Trajectory& traj, const Observation& prev_obs,
                                        const Action& action, const Observation& new_obs, Warnings& warnings) const {
  const std::string prompt =
      render_prompt(critique_template(), critique_slots(task, traj, prev_obs, action, new_obs));
  std::string problem;
  CritiqueVerdict verdict;
  bool parsed_ok = false;
  for (int attempt = 0; attempt < 2 && !parsed_ok; ++attempt) {
    const auto reply =
        ask(Role::kCritique, attempt == 0 ? prompt : prompt + format_reminder(Role::kCritique, problem));
    Warnings local;
    auto parsed = parse_critique(reply, &local);
    if (parsed) {
      verdict = std::move(*parsed);
      warnings.insert(warnings.end(), local.begin(), local.end());
      parsed_ok = true;
    } else {
      problem = parsed.error().message;
    }
  }
  if (!parsed_ok) {
    verdict = CritiqueVerdict{};
    warnings.push_back("critique module failed twice (" + problem + "); defaulting to score 3.0, continue");
  }
  if (detail::trim(verdict.details).empty()) verdict.details = observation_head(new_obs);
  return verdict;
}

RollbackPlan PolicyModules::decide_rollback(const std::string& task, const Trajectory& traj, const Action& action,
                                            const CritiqueVerdict& verdict, std::size_t t) const {
  if (traj.empty()) throw ContractViolation("decide_rollback needs a non-empty trajectory");
  const std::string prompt = render_prompt(rollback_template(), rollback_slots(task, traj, action, verdict));
  RollbackPlan plan;
  std::string problem;
  bool parsed_ok = false;
  for (int attempt = 0; attempt < 2 && !parsed_ok; ++attempt) {
    const auto reply =
        ask(Role::kRollback, attempt == 0 ? prompt : prompt + format_reminder(Role::kRollback, problem));
    auto parsed = parse_rollback(reply, &plan.warnings);
    if (parsed) {
      plan.decision = std::move(*parsed);
      parsed_ok = true;
    } else {
      problem = parsed.error().message;
    }
  }
  long requested = static_cast<long>(traj.size()) - 1;
  if (parsed_ok) {
    requested = plan.decision.back_idx;
  } else {
    plan.warnings.push_back("rollback module failed twice (" + problem + "); reverting one step");
  }
  plan.target = resolve_back_index(traj, requested, &plan.warnings);
  plan.decision.back_idx = static_cast<int>(plan.target);

  std::string text(detail::trim(plan.decision.experience));
  if (text.empty()) {
    text = "Reverted to step " + std::to_string(plan.target) + " after '" + serialize_action(action) + "'";
    if (!detail::trim(verdict.critic).empty()) text += ": " + std::string(detail::trim(verdict.critic));
  }
  plan.note = ExperienceNote{t + 1, plan.target, std::move(text)};
  return plan;
}

void commit_rollback(Trajectory& traj, const RollbackPlan& plan, const Action& latest_action) {
  const Action& taken = plan.target + 1 < traj.size() ? *traj.at(plan.target + 1).action_taken : latest_action;
  traj.record_tried_action(plan.target, taken);
  traj.rollback_to(plan.target);
  traj.add_experience(plan.note);
}

}  // namespace webnav
