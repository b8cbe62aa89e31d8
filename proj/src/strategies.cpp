#include "webnav/strategies.hpp"

#include "webnav/errors.hpp"

namespace webnav {

namespace {

NavState make_state(std::size_t index, const Observation& obs, std::string digest, std::optional<Action> taken) {
  NavState s;
  s.index = index;
  s.url = obs.url;
  s.obs_digest = std::move(digest);
  s.action_taken = std::move(taken);
  s.checkpoint = is_checkpoint_url(obs.url);
  return s;
}

void append_all(Warnings& into, const Warnings& from) { into.insert(into.end(), from.begin(), from.end()); }

void finish(RunTrace& trace, const Environment& env) {
  trace.counters.steps_used = trace.steps.size();
  trace.goal_reached = env.goal_reached();
}

void fail(RunTrace& trace, const std::exception& e) {
  trace.failed = true;
  trace.error = e.what();
}

// Shared loop for Rollback and OneWay; OneWay ignores back decisions.
RunTrace run_linear(Environment& env, const PolicyModules& policy, const EpisodeInput& input, bool allow_rollback) {
  if (input.max_steps < 1) throw ContractViolation("max_steps must be at least 1");
  RunTrace trace;
  trace.task_id = input.task_id;
  trace.strategy = allow_rollback ? "rollback" : "oneway";
  Trajectory& traj = trace.trajectory;
  try {
    Observation obs = env.reset();
    traj.append_state(make_state(0, obs, observation_head(obs), std::nullopt));

    for (std::size_t t = 0; t < input.max_steps; ++t) {
      auto decision = policy.decide_action(input.task, traj, obs);
      append_all(trace.warnings, decision.warnings);
      StepRecord rec{t, decision.thought, decision.action, std::nullopt, std::nullopt, false, obs.url};
      const Action& a = rec.action;

      if (is_stop(a)) {
        trace.final_answer = std::get<Stop>(a).answer;
        trace.counters.stopped = true;
        trace.steps.push_back(std::move(rec));
        break;
      }
      traj.record_tried_action(traj.size() - 1, a);
      Observation next = env.step(a);
      auto verdict = policy.critique(input.task, traj, obs, a, next, trace.warnings);
      rec.critique = verdict;

      bool reverted = false;
      if (allow_rollback && verdict.decision == Decision::kBack) {
        auto plan = policy.decide_rollback(input.task, traj, a, verdict, t);
        append_all(trace.warnings, plan.warnings);
        auto restored = env.rollback(traj.at(plan.target).url);
        if (restored) {
          commit_rollback(traj, plan, a);
          obs = std::move(*restored);
          rec.rollback = plan.decision;
          rec.switched = true;
          ++trace.counters.switches;
          reverted = true;
        } else {
          trace.warnings.push_back("step " + std::to_string(t) + ": rollback to state " +
                                   std::to_string(plan.target) + " failed (" + restored.error() +
                                   "); continuing from the current state");
        }
      }
      if (!reverted) {
        traj.append_state(make_state(traj.size(), next, verdict.details, a));
        obs = std::move(next);
      }
      rec.url = obs.url;
      trace.steps.push_back(std::move(rec));
    }
  } catch (const EnvironmentError& e) {
    fail(trace, e);
  } catch (const BackendError& e) {
    fail(trace, e);
  }
  finish(trace, env);
  return trace;
}

struct Node {
  NavState state;  // index is the node id, not the path position
  std::optional<std::size_t> parent;
  double value = kInitialStateValue;
  bool exhausted = false;
};

// Path from the root to `id`, reindexed as a linear trajectory.
Trajectory path_to(const std::vector<Node>& nodes, std::size_t id) {
  std::vector<std::size_t> chain;
  for (std::optional<std::size_t> cur = id; cur; cur = nodes[*cur].parent) chain.push_back(*cur);
  Trajectory traj;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    NavState s = nodes[*it].state;
    s.index = traj.size();
    traj.append_state(std::move(s));
  }
  return traj;
}

// Highest value among selectable nodes; the current node wins ties, then the
// most recent one.
std::optional<std::size_t> select_node(const std::vector<Node>& nodes, std::size_t current) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.exhausted || !n.state.checkpoint) continue;
    if (!best || n.value > nodes[*best].value || (n.value == nodes[*best].value && *best != current)) best = i;
  }
  if (best && *best != current && !nodes[current].exhausted && nodes[current].state.checkpoint &&
      nodes[current].value == nodes[*best].value) {
    return current;
  }
  return best;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kOneWay: return "oneway";
    case StrategyKind::kBestFirst: return "bestfirst";
    case StrategyKind::kRollback: return "rollback";
  }
  return "oneway";
}

std::optional<StrategyKind> strategy_from_string(std::string_view name) {
  for (auto k : {StrategyKind::kOneWay, StrategyKind::kBestFirst, StrategyKind::kRollback}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

RunTrace run_rollback(Environment& env, const PolicyModules& policy, const EpisodeInput& input) {
  return run_linear(env, policy, input, true);
}

RunTrace run_oneway(Environment& env, const PolicyModules& policy, const EpisodeInput& input) {
  return run_linear(env, policy, input, false);
}

RunTrace run_bestfirst(Environment& env, const PolicyModules& policy, const EpisodeInput& input) {
  if (input.max_steps < 1) throw ContractViolation("max_steps must be at least 1");
  RunTrace trace;
  trace.task_id = input.task_id;
  trace.strategy = "bestfirst";
  std::vector<Node> nodes;
  std::size_t current = 0;
  try {
    Observation obs = env.reset();
    nodes.push_back(Node{make_state(0, obs, observation_head(obs), std::nullopt), std::nullopt});

    for (std::size_t t = 0; t < input.max_steps; ++t) {
      StepRecord rec{t, "", Wait{}, std::nullopt, std::nullopt, false, obs.url};
      while (true) {
        auto pick = select_node(nodes, current);
        if (!pick || *pick == current) break;
        auto restored = env.rollback(nodes[*pick].state.url);
        if (!restored) {
          nodes[*pick].exhausted = true;
          trace.warnings.push_back("step " + std::to_string(t) + ": switch to state " + std::to_string(*pick) +
                                   " failed (" + restored.error() + ")");
          continue;
        }
        current = *pick;
        obs = std::move(*restored);
        rec.rollback = RollbackDecision{"switch to the highest-valued state", static_cast<int>(current), ""};
        rec.switched = true;
        ++trace.counters.switches;
        break;
      }

      Trajectory path = path_to(nodes, current);
      auto decision = policy.decide_action(input.task, path, obs);
      append_all(trace.warnings, decision.warnings);
      rec.thought = decision.thought;
      rec.action = decision.action;
      const Action& a = rec.action;

      if (is_stop(a)) {
        trace.final_answer = std::get<Stop>(a).answer;
        trace.counters.stopped = true;
        rec.url = obs.url;
        trace.steps.push_back(std::move(rec));
        break;
      }
      auto& tried = nodes[current].state.tried_actions;
      tried.insert(serialize_action(a));
      if (tried.size() >= kBestFirstExhaustion) nodes[current].exhausted = true;
      path.record_tried_action(path.size() - 1, a);

      Observation next = env.step(a);
      auto verdict = policy.critique(input.task, path, obs, a, next, trace.warnings);
      rec.critique = verdict;
      nodes.push_back(Node{make_state(nodes.size(), next, verdict.details, a), current, verdict.score});
      current = nodes.size() - 1;
      obs = std::move(next);
      rec.url = obs.url;
      trace.steps.push_back(std::move(rec));
    }
  } catch (const EnvironmentError& e) {
    fail(trace, e);
  } catch (const BackendError& e) {
    fail(trace, e);
  }
  if (!nodes.empty()) trace.trajectory = path_to(nodes, current);
  finish(trace, env);
  return trace;
}

RunTrace run_strategy(StrategyKind kind, Environment& env, const PolicyModules& policy, const EpisodeInput& input) {
  switch (kind) {
    case StrategyKind::kOneWay: return run_oneway(env, policy, input);
    case StrategyKind::kBestFirst: return run_bestfirst(env, policy, input);
    case StrategyKind::kRollback: return run_rollback(env, policy, input);
  }
  return run_oneway(env, policy, input);
}

bool detect_struggle(const std::vector<Action>& actions) {
  bool prev_goback = false;
  for (const auto& a : actions) {
    if (std::holds_alternative<Restart>(a)) return true;
    const bool goback = std::holds_alternative<GoBack>(a);
    if (goback && prev_goback) return true;
    prev_goback = goback;
  }
  return false;
}

bool detect_struggle(const RunTrace& trace) {
  std::vector<Action> actions;
  actions.reserve(trace.steps.size());
  for (const auto& s : trace.steps) actions.push_back(s.action);
  return detect_struggle(actions);
}

}  // namespace webnav
