#include <deque>

#include "doctest.h"
#include "fixtures.hpp"
#include "webnav/environment.hpp"
#include "webnav/errors.hpp"
#include "webnav/trap_graph.hpp"

using namespace webnav;
using webnav::testing::chain_abc;
using webnav::testing::graph_from_links;

namespace {

// Independent reachability check used as the oracle for generated graphs.
bool goal_reachable(const SiteGraph& g) {
  std::set<std::string> seen{g.start_url()};
  std::deque<std::string> queue{g.start_url()};
  while (!queue.empty()) {
    auto url = queue.front();
    queue.pop_front();
    if (g.goal().urls.count(url)) return true;
    for (const auto& [id, el] : g.page(url).elements) {
      if (el.transition && seen.insert(el.transition->target).second) queue.push_back(el.transition->target);
    }
  }
  return false;
}

}  // namespace

TEST_CASE("reset observes the start page and is repeatable") {
  SimulatedEnvironment env(chain_abc());
  auto a = env.reset();
  CHECK(a.url == "http://s/A");
  CHECK(env.reset() == a);
}

TEST_CASE("graph construction rejects a start url outside the pages") {
  CHECK_THROWS_AS(graph_from_links({{"http://s/A", {}}}, "http://s/Z", {}), ConfigError);
  CHECK_THROWS_AS(graph_from_links({{"http://s/A", {{"x", "http://s/missing"}}}}, "http://s/A", {}), ConfigError);
}

TEST_CASE("a trap that can reach the goal is rejected") {
  CHECK_THROWS_AS(graph_from_links({{"http://s/A", {{"t", "http://s/T"}}}, {"http://s/T", {{"g", "http://s/G"}}},
                                    {"http://s/G", {}}},
                                   "http://s/A", {"http://s/G"}, {"http://s/T"}),
                  ConfigError);
}

TEST_CASE("click, goback and invalid elements") {
  SimulatedEnvironment env(chain_abc());
  env.reset();
  CHECK(env.step(Click{1, "to B"}).url == "http://s/B");
  CHECK(env.step(GoBack{}).url == "http://s/A");
  auto bad = env.step(Click{9, ""});
  CHECK(bad.url == "http://s/A");
  REQUIRE(bad.error);
  CHECK(observation_text(bad).find("[Notice]") != std::string::npos);
  CHECK_THROWS_AS(env.step(Stop{"x", ""}), ContractViolation);
}

TEST_CASE("scrolling saturates at the last window") {
  nlohmann::json doc = {
      {"start_url", "http://s/L"},
      {"pages",
       {{{"url", "http://s/L"},
         {"elements", {{{"id", 1}, {"kind", "static"}, {"label", "top"}, {"window", 0}},
                       {{"id", 2}, {"kind", "link"}, {"label", "bottom"}, {"window", 1}}}}}}}};
  SimulatedEnvironment env(std::make_shared<const SiteGraph>(SiteGraph::from_json(doc)));
  env.reset();
  CHECK(env.step(ScrollDown{}).window_offset == 1);
  CHECK(env.step(ScrollDown{}).window_offset == 1);
  // [2] is only visible in the second window.
  CHECK_FALSE(env.step(Click{2, ""}).error);
  CHECK(env.step(ScrollUp{}).window_offset == 0);
  CHECK(env.step(Click{2, ""}).error);
}

TEST_CASE("typing records the entry and can satisfy the goal") {
  nlohmann::json doc = {
      {"start_url", "http://s/search"},
      {"goal", {{"urls", {"http://s/results"}}, {"required_text", "pizza"}}},
      {"pages",
       {{{"url", "http://s/search"},
         {"elements", {{{"id", 4}, {"kind", "textbox"}, {"label", "query"},
                        {"transition", {{"on", "type"}, {"target", "http://s/results"}}}}}}},
        {{"url", "http://s/results"}}}}};
  SimulatedEnvironment env(std::make_shared<const SiteGraph>(SiteGraph::from_json(doc)));
  env.reset();
  CHECK(env.step(Click{4, ""}).error);  // textboxes are not clickable
  CHECK(env.step(Type{4, "best pizza"}).url == "http://s/results");
  CHECK(env.goal_reached() == true);
  CHECK(env.state().typed_log.size() == 1);
}

TEST_CASE("rollback truncates history") {
  SimulatedEnvironment env(chain_abc());
  env.reset();
  env.step(Click{1, ""});
  env.step(Click{1, ""});
  auto back = env.rollback("http://s/A");
  REQUIRE(back);
  CHECK(back->url == "http://s/A");
  CHECK(env.state().history == std::vector<std::string>{"http://s/A"});

  auto same = env.state();
  REQUIRE(env.rollback("http://s/A"));
  CHECK(env.state() == same);

  auto never = env.rollback("http://s/nowhere");
  CHECK_FALSE(never);
  CHECK(env.state() == same);
}

TEST_CASE("rollback to a page popped by goback navigates to it") {
  SimulatedEnvironment env(chain_abc());
  env.reset();
  env.step(Click{1, ""});
  env.step(GoBack{});
  REQUIRE(env.rollback("http://s/B"));
  CHECK(env.state().current_url == "http://s/B");
  CHECK(env.state().history == std::vector<std::string>{"http://s/A", "http://s/B"});
}

TEST_CASE("graph json round trip") {
  auto g = chain_abc();
  CHECK(SiteGraph::from_json(g->to_json()) == *g);
}

TEST_CASE("trap generator") {
  auto chain = generate_trap_site(1, 3, 0);
  CHECK(chain.graph->pages().size() == 4);
  CHECK(chain.branches.empty());
  CHECK(generate_trap_graph(1, 3, 0) == *chain.graph);
  CHECK(generate_trap_graph(1, 4, 2) == generate_trap_graph(1, 4, 2));
  CHECK_FALSE(generate_trap_graph(1, 4, 2) == generate_trap_graph(2, 4, 2));
  for (std::uint64_t seed : {1, 2}) {
    auto site = generate_trap_site(seed, 4, 2);
    CHECK(goal_reachable(*site.graph));
    CHECK(site.branches.size() == 2);
    for (const auto& trap : site.graph->traps()) {
      for (const auto& url : site.graph->reachable_from(trap)) CHECK(site.graph->goal().urls.count(url) == 0);
    }
  }
  CHECK_THROWS_AS(generate_trap_site(1, 1, 0), ConfigError);
  CHECK_THROWS_AS(generate_trap_site(1, 3, 4), ConfigError);
}

TEST_CASE("observation head is one bounded line") {
  Observation obs;
  obs.axtree = std::string(300, 'x') + "\nmore";
  auto head = observation_head(obs);
  CHECK(head.find('\n') == std::string::npos);
  CHECK(head.size() <= 163);
}
