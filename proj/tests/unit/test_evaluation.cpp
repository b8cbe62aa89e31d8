#include "doctest.h"
#include "fixtures.hpp"
#include "webnav/errors.hpp"
#include "webnav/evaluation.hpp"

using namespace webnav;
using webnav::testing::SequenceBackend;

namespace {

ScoredTrace scored(const std::string& strategy, std::optional<double> score, std::size_t steps = 4,
                   std::size_t switches = 0, std::vector<Action> actions = {}) {
  ScoredTrace s;
  s.trace.strategy = strategy;
  s.trace.counters.steps_used = steps;
  s.trace.counters.switches = switches;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    s.trace.steps.push_back({i, "", actions[i], std::nullopt, std::nullopt, false, ""});
  }
  if (score) s.eval = EvalResult{"", "", "", *score};
  return s;
}

MetricsReport one(const std::string& strategy, double full) {
  StrategyMetrics m;
  m.strategy = strategy;
  m.n = 10;
  m.full_pct = full;
  return MetricsReport{{m}};
}

}  // namespace

TEST_CASE("evaluator prompt fill rules") {
  RunTrace trace;
  EvalInput in{"task", std::nullopt, "http://s/"};
  auto slots = eval_slots(in, trace);
  CHECK(slots.at("pred_answer") == "N/A");
  CHECK(slots.at("gold_info") == "N/A");
  trace.final_answer = "42";
  in.gold = "42 items";
  slots = eval_slots(in, trace);
  CHECK(slots.at("pred_answer") == "42");
  CHECK(slots.at("gold_info") == "42 items");
}

TEST_CASE("evaluate_trace passes scores through and marks failures missing") {
  SequenceBackend b;
  b.push(Role::kEval, "Summary: s\nThought: t\nCriteria: c\nScore: 1.0");
  PolicyModules p(b);
  RunTrace trace;
  EvalInput in{"task", std::string("gold"), "http://s/"};
  auto full = evaluate_trace(in, trace, p);
  REQUIRE(full);
  CHECK(full->score == 1.0);
  // Queue exhausted: the backend now throws, which counts as missing.
  Warnings w;
  CHECK_FALSE(evaluate_trace(in, trace, p, &w));
  CHECK(w.size() == 1);

  SequenceBackend garbage;
  garbage.set_fallback(Role::kEval, "looks good to me");
  CHECK_FALSE(evaluate_trace(in, trace, PolicyModules(garbage)));
  CHECK(garbage.calls(Role::kEval) == 2);
}

TEST_CASE("aggregate arithmetic") {
  auto r = aggregate({scored("rollback", 1.0), scored("rollback", 0.5), scored("rollback", 0.0)});
  const auto* m = r.find("rollback");
  REQUIRE(m);
  CHECK(m->full_pct == doctest::Approx(33.3333).epsilon(1e-6));
  CHECK(m->partial_pct == doctest::Approx(50.0));

  auto all = aggregate({scored("oneway", 1.0), scored("oneway", 1.0)});
  CHECK(all.find("oneway")->full_pct == 100.0);
  CHECK(all.find("oneway")->partial_pct == 100.0);

  auto ow = aggregate({scored("oneway", 1.0, 3, 0), scored("oneway", 0.0, 5, 0), scored("oneway", 0.5, 7, 0)});
  CHECK(ow.find("oneway")->mean_switches == 0.0);
  CHECK(ow.find("oneway")->mean_steps == 5.0);

  CHECK_THROWS_AS(aggregate({}), ContractViolation);
}

TEST_CASE("missing evaluations are excluded and counted") {
  auto r = aggregate({scored("bestfirst", 1.0, 4, 2), scored("bestfirst", std::nullopt, 16, 9)});
  const auto* m = r.find("bestfirst");
  CHECK(m->n == 1);
  CHECK(m->excluded == 1);
  CHECK(m->mean_steps == 4.0);
  CHECK(m->mean_switches == 2.0);
}

TEST_CASE("strategies are reported in a fixed order") {
  auto r = aggregate({scored("rollback", 1.0), scored("custom", 1.0), scored("oneway", 1.0), scored("bestfirst", 1.0)});
  REQUIRE(r.strategies.size() == 4);
  CHECK(r.strategies[0].strategy == "oneway");
  CHECK(r.strategies[1].strategy == "bestfirst");
  CHECK(r.strategies[2].strategy == "rollback");
  CHECK(r.strategies[3].strategy == "custom");
}

TEST_CASE("struggle ratio") {
  auto r = aggregate({scored("oneway", 1.0, 4, 0, {GoBack{}, GoBack{}}), scored("oneway", 1.0, 4, 0, {Restart{}}),
                      scored("oneway", 1.0, 4, 0, {GoBack{}, Wait{}, GoBack{}}),
                      scored("oneway", 1.0, 4, 0, {Click{1, ""}})});
  CHECK(r.find("oneway")->struggle_ratio == 0.5);
}

TEST_CASE("repeat dispersion") {
  auto d = mean_and_sd({20, 22, 24});
  CHECK(d.mean == 22.0);
  CHECK(d.sd == doctest::Approx(2.0));
  CHECK(mean_and_sd({5}).sd == 0.0);

  auto rep = summarize_repeats({one("rollback", 20), one("rollback", 22), one("rollback", 24)});
  REQUIRE(rep.summary.size() == 1);
  CHECK(rep.summary[0].repeats == 3);
  CHECK(rep.summary[0].full_pct.mean == 22.0);
  CHECK(rep.summary[0].full_pct.sd == doctest::Approx(2.0));
  CHECK(format_table(rep).find("22.00±2.00") != std::string::npos);

  auto same = summarize_repeats({one("oneway", 50), one("oneway", 50), one("oneway", 50)});
  CHECK(same.summary[0].full_pct.sd == 0.0);
  CHECK_THROWS_AS(summarize_repeats({}), ContractViolation);
}

TEST_CASE("reports round-trip through json") {
  auto r = aggregate({scored("rollback", 1.0, 3, 1), scored("oneway", 0.25, 9, 0), scored("oneway", std::nullopt)});
  CHECK(metrics_report_from_json(nlohmann::json::parse(to_json(r).dump())) == r);
  auto rep = summarize_repeats({r, r});
  CHECK(replicated_report_from_json(nlohmann::json::parse(to_json(rep).dump())) == rep);
}
