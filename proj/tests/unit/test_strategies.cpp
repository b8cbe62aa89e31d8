#include "doctest.h"
#include "fixtures.hpp"
#include "webnav/errors.hpp"
#include "webnav/strategies.hpp"
#include "webnav/trap_graph.hpp"

using namespace webnav;
using webnav::testing::chain_abc;
using webnav::testing::critique_reply;
using webnav::testing::SequenceBackend;

namespace {

constexpr StrategyKind kAll[] = {StrategyKind::kOneWay, StrategyKind::kBestFirst, StrategyKind::kRollback};

EpisodeInput input(std::size_t max_steps = kDefaultMaxSteps) { return {"t1", "Reach page C", max_steps}; }

// Wraps a simulated environment; can fail a given step or refuse rollbacks.
class FlakyEnvironment final : public Environment {
 public:
  FlakyEnvironment(std::shared_ptr<const SiteGraph> g, int fail_on_step, bool refuse_rollback)
      : inner_(std::move(g)), fail_on_step_(fail_on_step), refuse_rollback_(refuse_rollback) {}
  Observation reset() override { return inner_.reset(); }
  Observation step(const Action& a) override {
    if (++steps_ == fail_on_step_) throw EnvironmentError("browser crashed");
    return inner_.step(a);
  }
  Expected<Observation, std::string> rollback(const std::string& url) override {
    if (refuse_rollback_) return std::string("rollback-failed: refused");
    return inner_.rollback(url);
  }

 private:
  SimulatedEnvironment inner_;
  int fail_on_step_;
  bool refuse_rollback_;
  int steps_ = 0;
};

RunTrace run_trap(StrategyKind kind, std::uint64_t seed, std::size_t max_steps = kDefaultMaxSteps) {
  auto p = trap_params_for_seed(seed);
  auto site = generate_trap_site(seed, p.depth, p.trap_count);
  ScriptedBackend backend(oracle_playbook({site}));
  PolicyModules policy(backend);
  SimulatedEnvironment env(site.graph);
  return run_strategy(kind, env, policy, {site.tag, site.task_text(), max_steps});
}

}  // namespace

TEST_CASE("stop at t=0 uses one step and no switches") {
  for (auto kind : kAll) {
    SequenceBackend b;
    b.push(Role::kAction, "Action: stop [N/A] (nothing to do)");
    PolicyModules p(b);
    SimulatedEnvironment env(chain_abc());
    auto trace = run_strategy(kind, env, p, input());
    CHECK(trace.counters.steps_used == 1);
    CHECK(trace.counters.switches == 0);
    CHECK(trace.counters.stopped);
    CHECK(trace.final_answer == "N/A");
    CHECK(b.calls(Role::kCritique) == 0);
  }
}

TEST_CASE("a never-stopping policy uses the whole budget") {
  for (auto kind : kAll) {
    SequenceBackend b;
    b.set_fallback(Role::kAction, "Action: scroll down");
    b.set_fallback(Role::kCritique, critique_reply(3.0, "continue"));
    PolicyModules p(b);
    SimulatedEnvironment env(chain_abc());
    auto trace = run_strategy(kind, env, p, input(16));
    CHECK(trace.counters.steps_used == 16);
    CHECK_FALSE(trace.counters.stopped);
    CHECK(trace.final_answer.empty());
    // All values tie at 3.0, so BestFirst never leaves the current state.
    CHECK(trace.counters.switches == 0);
  }
}

TEST_CASE("trap fixture: one switch for rollback, recovery by goback for oneway") {
  auto site = generate_trap_site(1, trap_params_for_seed(1).depth, trap_params_for_seed(1).trap_count);
  REQUIRE(site.branches.size() == 1);
  REQUIRE(site.branches[0].urls.size() == 2);

  auto rb = run_trap(StrategyKind::kRollback, 1);
  CHECK(rb.goal_reached == true);
  CHECK(rb.counters.switches == 1);
  // Two steps into the trap (the second also reverts), the main path, then stop.
  CHECK(rb.counters.steps_used == 2 + site.depth() + 1);
  CHECK(rb.final_answer == site.answer);
  CHECK_FALSE(detect_struggle(rb));

  auto ow = run_trap(StrategyKind::kOneWay, 1);
  CHECK(ow.counters.switches == 0);
  CHECK(ow.goal_reached == true);
  CHECK(detect_struggle(ow));
  CHECK(ow.counters.steps_used > rb.counters.steps_used);

  auto bf = run_trap(StrategyKind::kBestFirst, 1);
  CHECK(bf.counters.switches >= 2);
  CHECK(bf.goal_reached == true);
}

TEST_CASE("rollback records the revert inside the same step") {
  auto rb = run_trap(StrategyKind::kRollback, 1);
  std::size_t reverts = 0;
  for (const auto& s : rb.steps) {
    if (!s.rollback) continue;
    ++reverts;
    CHECK(s.switched);
    REQUIRE(s.critique);
    CHECK(s.critique->decision == Decision::kBack);
  }
  CHECK(reverts == 1);
  CHECK(rb.trajectory.experiences().size() == 1);
  CHECK(rb.trajectory.size() == rb.trajectory.states().back().index + 1);
}

TEST_CASE("rollback without back decisions equals oneway") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    SequenceBackend a, b;
    for (auto* s : {&a, &b}) {
      s->set_fallback(Role::kAction, "Thought: go\nAction: click [1] {next}");
      s->set_fallback(Role::kCritique, critique_reply(4.0, "continue", "fine"));
    }
    SimulatedEnvironment ea(chain_abc()), eb(chain_abc());
    auto ra = run_rollback(ea, PolicyModules(a), input(3 + seed));
    auto rb = run_oneway(eb, PolicyModules(b), input(3 + seed));
    ra.strategy = rb.strategy;
    CHECK(ra == rb);
  }
}

TEST_CASE("bestfirst switches to a higher-valued state within the step") {
  SequenceBackend b;
  b.push(Role::kAction, "Action: click [1] {to B}");
  b.push(Role::kAction, "Action: stop [none] (gave up)");
  b.push(Role::kCritique, critique_reply(1.0, "back", "dead end"));
  PolicyModules p(b);
  SimulatedEnvironment env(chain_abc());
  auto trace = run_bestfirst(env, p, input());
  REQUIRE(trace.steps.size() == 2);
  CHECK(trace.counters.switches == 1);
  CHECK(trace.steps[1].switched);
  REQUIRE(trace.steps[1].rollback);
  CHECK(trace.steps[1].rollback->back_idx == 0);
  CHECK(trace.steps[1].url == "http://s/A");
  CHECK(trace.trajectory.size() == 1);
}

TEST_CASE("environment failures end the episode with the partial trace") {
  SequenceBackend b;
  b.set_fallback(Role::kAction, "Action: scroll down");
  b.set_fallback(Role::kCritique, critique_reply(3.0, "continue"));
  PolicyModules p(b);
  FlakyEnvironment env(chain_abc(), 3, false);
  auto trace = run_rollback(env, p, input());
  CHECK(trace.failed);
  CHECK(trace.error == "browser crashed");
  CHECK(trace.counters.steps_used == 2);
}

TEST_CASE("a refused rollback keeps the state and leaves no rollback record") {
  SequenceBackend b;
  b.push(Role::kAction, "Action: click [1] {to B}");
  b.push(Role::kAction, "Action: stop [x] (y)");
  b.push(Role::kCritique, critique_reply(1.0, "back"));
  b.push(Role::kRollback, "BackIdx: <0>");
  PolicyModules p(b);
  FlakyEnvironment env(chain_abc(), -1, true);
  auto trace = run_rollback(env, p, input());
  CHECK(trace.counters.switches == 0);
  CHECK_FALSE(trace.steps[0].rollback);
  CHECK(trace.trajectory.size() == 2);
  CHECK(trace.counters.steps_used == 2);
  CHECK_FALSE(trace.warnings.empty());
}

TEST_CASE("budget one ends after a single step") {
  SequenceBackend b;
  b.set_fallback(Role::kAction, "Action: click [1] {next}");
  b.set_fallback(Role::kCritique, critique_reply(3.0, "continue"));
  PolicyModules p(b);
  SimulatedEnvironment env(chain_abc());
  CHECK(run_oneway(env, p, input(1)).counters.steps_used == 1);
  CHECK_THROWS_AS(run_oneway(env, p, input(0)), ContractViolation);
}

TEST_CASE("struggle detection") {
  CHECK(detect_struggle(std::vector<Action>{Click{1, ""}, GoBack{}, GoBack{}, Click{2, ""}}));
  CHECK_FALSE(detect_struggle(std::vector<Action>{Click{1, ""}, GoBack{}, Click{2, ""}, GoBack{}}));
  CHECK(detect_struggle(std::vector<Action>{Restart{}}));
  CHECK_FALSE(detect_struggle(std::vector<Action>{}));
}

TEST_CASE("strategy names") {
  for (auto k : kAll) CHECK(strategy_from_string(to_string(k)) == k);
  CHECK_FALSE(strategy_from_string("dfs"));
}
