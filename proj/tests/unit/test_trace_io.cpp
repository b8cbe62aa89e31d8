#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "webnav/errors.hpp"
#include "webnav/trace_io.hpp"
#include "webnav/trap_graph.hpp"

using namespace webnav;

namespace {

RunTrace sample_trace() {
  auto site = generate_trap_site(1, 3, 1);
  ScriptedBackend backend(oracle_playbook({site}));
  SimulatedEnvironment env(site.graph);
  return run_rollback(env, PolicyModules(backend), {site.tag, site.task_text(), 16});
}

}  // namespace

TEST_CASE("trace lines carry exactly the step fields") {
  auto trace = sample_trace();
  for (const auto& step : trace.steps) {
    auto j = to_json(step);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"t", "thought", "action", "critique", "rollback", "url"});
  }
}

TEST_CASE("steps round-trip through jsonl") {
  auto trace = sample_trace();
  std::stringstream io;
  write_trace_jsonl(io, trace);
  CHECK(read_trace_jsonl(io) == trace.steps);
  std::stringstream bad("{\"t\": 0}\n");
  CHECK_THROWS_AS(read_trace_jsonl(bad), ConfigError);
}

TEST_CASE("trajectory round-trips") {
  auto trace = sample_trace();
  CHECK(trajectory_from_json(nlohmann::json::parse(to_json(trace.trajectory).dump())) == trace.trajectory);
}

TEST_CASE("persisted episodes load back whole") {
  auto dir = testing::fresh_temp_dir("traceio");
  auto paths = episode_paths(dir, "task/with:odd chars");
  CHECK(paths.trace.parent_path() == dir);
  CHECK_FALSE(load_episode(paths));

  auto trace = sample_trace();
  EvalResult eval{"s", "t", "c", 0.5};
  persist_episode(paths, trace, eval, {});
  auto loaded = load_episode(paths);
  REQUIRE(loaded);
  CHECK(loaded->trace == trace);
  CHECK(loaded->eval == eval);

  // A trace file that lost lines no longer matches the run summary.
  testing::write_file(paths.trace, "");
  CHECK_THROWS_AS(load_episode(paths), ConfigError);
  std::filesystem::remove_all(dir);
}
