#include <cstdlib>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "webnav/errors.hpp"
#include "webnav/suite.hpp"
#include "webnav/trace_io.hpp"
#include "webnav/trap_graph.hpp"

using namespace webnav;
using namespace webnav::testing;
namespace fs = std::filesystem;

namespace {

// Writes generated tasks and, alongside, frozen fixture copies of the same
// sites with the matching playbook.
struct SuiteFiles {
  fs::path dir;
  fs::path generated;
  fs::path fixtures;
  fs::path playbook;
};

SuiteFiles write_suite(std::size_t count) {
  SuiteFiles f;
  f.dir = fresh_temp_dir("suite");
  f.generated = f.dir / "tasks.jsonl";
  f.fixtures = f.dir / "tasks-fixtures.jsonl";
  f.playbook = f.dir / "playbook.json";
  std::string gen, fix;
  std::vector<TrapSite> sites;
  for (auto t : generate_trap_tasks(1, count)) {
    gen += to_json(t).dump() + "\n";
    auto resolved = resolve_site(t, f.dir, 0);
    write_file(f.dir / "graphs" / (t.id + ".json"), resolved.graph->to_json().dump());
    t.site = nlohmann::json{{"graph", "graphs/" + t.id + ".json"}};
    fix += to_json(t).dump() + "\n";
    sites.push_back(*resolved.trap);
  }
  write_file(f.generated, gen);
  write_file(f.fixtures, fix);
  write_file(f.playbook, oracle_playbook(sites).to_json().dump());
  return f;
}

RunConfig config_for(const fs::path& tasks, const fs::path& out) {
  RunConfig c;
  c.tasks = tasks;
  c.out = out;
  return c;
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) ++n;
  }
  return n;
}

std::map<std::string, std::string> trace_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().string().find(".trace.jsonl") != std::string::npos) {
      out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
  }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WEBNAV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("two tasks by three strategies give six traces and one report") {
  auto f = write_suite(2);
  std::ostringstream log;
  auto summary = run_suite(config_for(f.fixtures, f.dir / "out"), log);
  CHECK(summary.executed == 6);
  CHECK(count_files(f.dir / "out", ".trace.jsonl") == 6);
  CHECK(fs::exists(f.dir / "out" / "report.json"));
  for (auto s : {"oneway", "bestfirst", "rollback"}) {
    CHECK(fs::exists(f.dir / "out" / s / "trap-1.trace.jsonl"));
  }
  fs::remove_all(f.dir);
}

TEST_CASE("a rerun after deleting only the report executes nothing") {
  auto f = write_suite(2);
  std::ostringstream log;
  auto cfg = config_for(f.generated, f.dir / "out");
  auto first = run_suite(cfg, log);
  const auto report = read_file(f.dir / "out" / "report.json");
  fs::remove(f.dir / "out" / "report.json");
  auto second = run_suite(cfg, log);
  CHECK(second.executed == 0);
  CHECK(second.skipped == 6);
  CHECK(read_file(f.dir / "out" / "report.json") == report);
  CHECK(second.report == first.report);
  fs::remove_all(f.dir);
}

TEST_CASE("evaluate-only over stored traces reproduces the report") {
  auto f = write_suite(2);
  std::ostringstream log;
  auto cfg = config_for(f.generated, f.dir / "out");
  auto first = run_suite(cfg, log);
  cfg.evaluate_only = true;
  auto again = run_suite(cfg, log);
  CHECK(again.executed == 0);
  CHECK(again.report == first.report);

  // Replay of the recorded evaluator calls gives the same answer too.
  cfg.backend = "replay:" + (f.dir / "out").string();
  CHECK(run_suite(cfg, log).report == first.report);
  fs::remove_all(f.dir);
}

TEST_CASE("the run seed reshapes generated sites only") {
  auto f = write_suite(2);
  std::ostringstream log;
  auto gen0 = config_for(f.generated, f.dir / "g0");
  auto gen7 = config_for(f.generated, f.dir / "g7");
  gen7.seed = 7;
  run_suite(gen0, log);
  run_suite(gen7, log);
  CHECK(trace_bytes(f.dir / "g0") != trace_bytes(f.dir / "g7"));

  auto fix0 = config_for(f.fixtures, f.dir / "f0");
  auto fix7 = config_for(f.fixtures, f.dir / "f7");
  fix0.backend = fix7.backend = "scripted:" + f.playbook.string();
  fix7.seed = 7;
  run_suite(fix0, log);
  run_suite(fix7, log);
  CHECK(trace_bytes(f.dir / "f0") == trace_bytes(f.dir / "f7"));
  // Oracle over generated sites and scripted over their frozen copies agree.
  CHECK(trace_bytes(f.dir / "f0") == trace_bytes(f.dir / "g0"));
  fs::remove_all(f.dir);
}

TEST_CASE("repeats land in their own directories") {
  auto f = write_suite(1);
  std::ostringstream log;
  auto cfg = config_for(f.generated, f.dir / "out");
  cfg.repeats = 3;
  cfg.parallel = 4;
  auto summary = run_suite(cfg, log);
  CHECK(summary.executed == 9);
  CHECK(fs::exists(f.dir / "out" / "repeat-3" / "rollback" / "trap-1.trace.jsonl"));
  REQUIRE(summary.report.summary.size() == 3);
  for (const auto& m : summary.report.summary) {
    CHECK(m.repeats == 3);
    CHECK(m.full_pct.sd == 0.0);
    CHECK(m.mean_steps.sd == 0.0);
  }
  fs::remove_all(f.dir);
}

TEST_CASE("episode failures are reported, not fatal") {
  auto f = write_suite(1);
  std::ostringstream log;
  auto cfg = config_for(f.generated, f.dir / "out");
  cfg.env = "live:exit 0";
  cfg.strategies = {StrategyKind::kRollback};
  auto summary = run_suite(cfg, log);
  CHECK(summary.failed == 1);
  CHECK(summary.report.per_repeat[0].find("rollback")->failed == 1);
  CHECK(run_cli("run --tasks " + f.generated.string() + " --out " + (f.dir / "cli").string() +
                " --env 'live:exit 0' --strategy rollback") == 0);
  fs::remove_all(f.dir);
}

TEST_CASE("configuration problems are errors") {
  auto f = write_suite(1);
  std::ostringstream log;
  auto cfg = config_for(f.generated, f.dir / "out");
  cfg.backend = "telepathy";
  CHECK_THROWS_AS(run_suite(cfg, log), ConfigError);
  cfg = config_for(f.dir / "missing.jsonl", f.dir / "out");
  CHECK_THROWS_AS(run_suite(cfg, log), ConfigError);
  cfg = config_for(f.generated, f.dir / "out");
  cfg.strategies.clear();
  CHECK_THROWS_AS(run_suite(cfg, log), ConfigError);

  const auto tasks = f.generated.string();
  CHECK(run_cli("run --tasks " + tasks + " --out " + (f.dir / "ok").string()) == 0);
  CHECK(run_cli("run --tasks " + tasks + " --strategy dfs") == 2);
  CHECK(run_cli("run --tasks " + tasks + " --backend telepathy") == 2);
  CHECK(run_cli("run --max-steps 0 --tasks " + tasks) == 2);
  CHECK(run_cli("run --tasks " + (f.dir / "missing.jsonl").string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  fs::remove_all(f.dir);
}

TEST_CASE("malformed task lines do not stop the suite") {
  auto f = write_suite(2);
  auto text = read_file(f.generated);
  write_file(f.generated, "{broken\n" + text);
  std::ostringstream log;
  auto summary = run_suite(config_for(f.generated, f.dir / "out"), log);
  CHECK(summary.ingest_errors.size() == 1);
  CHECK(summary.executed == 6);
  CHECK(log.str().find("line 1") != std::string::npos);
  fs::remove_all(f.dir);
}

TEST_CASE("config documents merge under explicit values") {
  RunConfig c;
  merge_config_json(c, {{"strategies", {"rollback"}}, {"max_steps", 8}, {"tasks", "t.jsonl"}, {"seed", 3}},
                    "/base");
  CHECK(c.strategies == std::vector<StrategyKind>{StrategyKind::kRollback});
  CHECK(c.max_steps == 8);
  CHECK(c.tasks == fs::path("/base/t.jsonl"));
  CHECK_THROWS_AS(merge_config_json(c, {{"strategies", {"dfs"}}}, "."), ConfigError);
  CHECK_THROWS_AS(merge_config_json(c, {{"max_steps", "many"}}, "."), ConfigError);
}
