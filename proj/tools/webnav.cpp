// webnav: run navigation strategies over a task suite and report metrics.
//
//   webnav run --tasks suite/tasks.jsonl --out runs [--strategy rollback ...]
//   webnav gen-suite --out suite --count 30
//   webnav driver --graph site.json      (wire-protocol driver on stdio)

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "webnav/errors.hpp"
#include "webnav/suite.hpp"
#include "webnav/trace_io.hpp"
#include "webnav/wire.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace webnav;

namespace {

constexpr int kConfigErrorExit = 2;

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ConfigError(path.string() + " is not JSON");
  return doc;
}

struct RunFlags {
  std::vector<std::string> strategies;
  std::size_t max_steps = kDefaultMaxSteps;
  std::string backend;
  std::string env;
  std::string tasks;
  std::string out;
  std::string exclusions;
  std::size_t parallel = 1;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  bool evaluate_only = false;
  std::string report_format = "table";
  std::string config;
  std::string model;
  double temperature = 0.0;
};

int do_run(const RunFlags& f, CLI::App& cmd) {
  RunConfig config;
  if (!f.config.empty()) {
    const fs::path cfg = f.config;
    merge_config_json(config, read_json_file(cfg), cfg.has_parent_path() ? cfg.parent_path() : fs::path("."));
  }
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--strategy")) {
    config.strategies.clear();
    for (const auto& s : f.strategies) {
      auto k = strategy_from_string(s);
      if (!k) throw ConfigError("unknown strategy '" + s + "'");
      config.strategies.push_back(*k);
    }
  }
  if (given("--max-steps")) config.max_steps = f.max_steps;
  if (given("--backend")) config.backend = f.backend;
  if (given("--env")) config.env = f.env;
  if (given("--tasks")) config.tasks = f.tasks;
  if (given("--out")) config.out = f.out;
  if (given("--exclusions")) config.exclusions = fs::path(f.exclusions);
  if (given("--parallel")) config.parallel = f.parallel;
  if (given("--repeats")) config.repeats = f.repeats;
  if (given("--seed")) config.seed = f.seed;
  if (given("--evaluate-only")) config.evaluate_only = f.evaluate_only;
  if (given("--report-format")) config.report_format = f.report_format;
  if (given("--model")) config.policy.model_id = f.model;
  if (given("--temperature")) config.policy.temperature = f.temperature;

  auto summary = run_suite(config, std::cerr);
  std::cerr << "episodes: " << summary.executed << " executed, " << summary.skipped << " resumed";
  if (summary.missing) std::cerr << ", " << summary.missing << " missing";
  std::cerr << ", " << summary.failed << " failed; " << summary.dropped_tasks << " tasks excluded, "
            << summary.ingest_errors.size() << " malformed task lines\n";
  if (config.report_format == "json") {
    std::cout << to_json(summary.report).dump(2) << "\n";
  } else {
    std::cout << format_table(summary.report);
  }
  return 0;
}

struct GenFlags {
  std::string out = "suite";
  std::size_t count = 30;
  std::uint64_t first_seed = 1;
  bool fixtures = false;
};

int do_gen_suite(const GenFlags& f) {
  const fs::path out = f.out;
  fs::create_directories(out);
  auto tasks = generate_trap_tasks(f.first_seed, f.count);
  std::string lines;
  for (const auto& t : tasks) lines += to_json(t).dump() + "\n";
  write_file_atomic(out / "tasks.jsonl", lines);

  if (f.fixtures) {
    // Frozen copies: graph files, tasks pointing at them, and the matching playbook.
    std::vector<TrapSite> sites;
    std::string fixture_lines;
    for (auto t : tasks) {
      auto resolved = resolve_site(t, out, 0);
      const auto rel = fs::path("graphs") / (t.id + ".json");
      write_file_atomic(out / rel, resolved.graph->to_json().dump(2) + "\n");
      t.site = json{{"graph", rel.string()}};
      fixture_lines += to_json(t).dump() + "\n";
      sites.push_back(std::move(*resolved.trap));
    }
    write_file_atomic(out / "tasks-fixtures.jsonl", fixture_lines);
    write_file_atomic(out / "playbook.json", oracle_playbook(sites).to_json().dump(2) + "\n");
  }
  std::cerr << "wrote " << tasks.size() << " tasks to " << (out / "tasks.jsonl").string() << "\n";
  return 0;
}

int do_driver(const std::string& graph_path, std::uint64_t trap_seed) {
  std::shared_ptr<const SiteGraph> graph;
  if (!graph_path.empty()) {
    graph = std::make_shared<const SiteGraph>(SiteGraph::from_json(read_json_file(graph_path)));
  } else {
    auto p = trap_params_for_seed(trap_seed);
    graph = generate_trap_site(trap_seed, p.depth, p.trap_count).graph;
  }
  SimulatedEnvironment env(graph);
  serve_wire(env, std::cin, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Web navigation search strategies over simulated or live sites"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run a task suite and report metrics");
  run->add_option("--strategy", rf.strategies, "oneway | bestfirst | rollback (repeatable)")->delimiter(',');
  run->add_option("--tasks", rf.tasks, "Task file (JSONL)");
  run->add_option("--max-steps", rf.max_steps, "Step budget per episode")->check(CLI::PositiveNumber);
  run->add_option("--backend", rf.backend, "oracle | scripted:<playbook.json> | http | replay:<run dir>");
  run->add_option("--env", rf.env, "simulated | live:<driver command>");
  run->add_option("--out", rf.out, "Output directory");
  run->add_option("--exclusions", rf.exclusions, "Website exclusion list");
  run->add_option("--parallel", rf.parallel, "Concurrent episodes")->check(CLI::PositiveNumber);
  run->add_option("--repeats", rf.repeats, "Repeats of the whole suite")->check(CLI::PositiveNumber);
  run->add_option("--seed", rf.seed, "Seed for generated sites");
  run->add_flag("--evaluate-only", rf.evaluate_only, "Re-evaluate stored traces without running episodes");
  run->add_option("--report-format", rf.report_format, "json | table")->check(CLI::IsMember({"json", "table"}));
  run->add_option("--config", rf.config, "JSON config document; explicit flags override it");
  run->add_option("--model", rf.model, "Model id sent to the backend");
  run->add_option("--temperature", rf.temperature, "Sampling temperature")->check(CLI::NonNegativeNumber);

  GenFlags gf;
  auto* gen = app.add_subcommand("gen-suite", "Write a seeded suite of trap-site tasks");
  gen->add_option("--out", gf.out, "Output directory");
  gen->add_option("--count", gf.count, "Number of tasks")->check(CLI::PositiveNumber);
  gen->add_option("--first-seed", gf.first_seed, "Seed of the first site");
  gen->add_flag("--fixtures", gf.fixtures, "Also write graph files, fixture tasks and the oracle playbook");

  std::string graph_path;
  std::uint64_t trap_seed = 1;
  auto* driver = app.add_subcommand("driver", "Serve a simulated site over the wire protocol on stdin/stdout");
  auto* graph_opt = driver->add_option("--graph", graph_path, "Site graph JSON");
  driver->add_option("--trap-seed", trap_seed, "Generate a trap site instead")->excludes(graph_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigErrorExit;
  }

  try {
    if (run->parsed()) return do_run(rf, *run);
    if (gen->parsed()) return do_gen_suite(gf);
    if (driver->parsed()) return do_driver(graph_path, trap_seed);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
