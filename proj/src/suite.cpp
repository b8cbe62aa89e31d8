#include "webnav/suite.hpp"

#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "text_util.hpp"
#include "webnav/backend.hpp"
#include "webnav/errors.hpp"
#include "webnav/trace_io.hpp"
#include "webnav/wire.hpp"

namespace webnav {

using nlohmann::json;

void RunConfig::validate() const {
  if (strategies.empty()) throw ConfigError("at least one strategy is required");
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (parallel < 1) throw ConfigError("parallel must be at least 1");
  if (tasks.empty()) throw ConfigError("a task file is required");
  if (out.empty()) throw ConfigError("an output directory is required");
  if (report_format != "json" && report_format != "table") {
    throw ConfigError("report format must be 'json' or 'table'");
  }
  const bool backend_ok = backend == "oracle" || backend == "http" || detail::istarts_with(backend, "scripted:") ||
                          detail::istarts_with(backend, "replay:");
  if (!backend_ok) throw ConfigError("unknown backend '" + backend + "'");
  if (env != "simulated" && env.rfind("live:", 0) != 0) throw ConfigError("unknown environment '" + env + "'");
  if (policy.temperature < 0) throw ConfigError("temperature must be non-negative");
}

void merge_config_json(RunConfig& config, const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
  auto path_of = [&](const json& v) {
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() ? base_dir / p : p;
  };
  try {
    if (doc.contains("strategies")) {
      config.strategies.clear();
      for (const auto& s : doc["strategies"]) {
        auto k = strategy_from_string(s.get<std::string>());
        if (!k) throw ConfigError("unknown strategy '" + s.get<std::string>() + "'");
        config.strategies.push_back(*k);
      }
    }
    if (doc.contains("max_steps")) config.max_steps = doc["max_steps"].get<std::size_t>();
    if (doc.contains("backend")) config.backend = doc["backend"].get<std::string>();
    if (doc.contains("env")) config.env = doc["env"].get<std::string>();
    if (doc.contains("tasks")) config.tasks = path_of(doc["tasks"]);
    if (doc.contains("out")) config.out = path_of(doc["out"]);
    if (doc.contains("exclusions")) config.exclusions = path_of(doc["exclusions"]);
    if (doc.contains("parallel")) config.parallel = doc["parallel"].get<std::size_t>();
    if (doc.contains("repeats")) config.repeats = doc["repeats"].get<std::size_t>();
    if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("evaluate_only")) config.evaluate_only = doc["evaluate_only"].get<bool>();
    if (doc.contains("report_format")) config.report_format = doc["report_format"].get<std::string>();
    if (doc.contains("policy")) {
      const auto& p = doc["policy"];
      config.policy.temperature = p.value("temperature", config.policy.temperature);
      config.policy.max_output_tokens = p.value("max_output_tokens", config.policy.max_output_tokens);
      config.policy.model_id = p.value("model_id", config.policy.model_id);
    }
    if (doc.contains("http")) config.http = doc["http"];
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

std::filesystem::path repeat_dir(const RunConfig& config, std::size_t repeat) {
  return config.repeats > 1 ? config.out / ("repeat-" + std::to_string(repeat)) : config.out;
}

namespace {

struct Job {
  std::size_t repeat = 1;
  StrategyKind strategy;
  std::size_t task_index = 0;
};

struct JobResult {
  std::optional<ScoredTrace> scored;
  bool executed = false;
};

struct SuiteContext {
  const RunConfig& config;
  std::vector<TaskSpec> tasks;
  std::vector<std::optional<ResolvedSite>> sites;
  std::shared_ptr<Backend> shared_backend;  // null for replay
  std::filesystem::path replay_root;
};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::shared_ptr<Backend> make_backend(const RunConfig& config, const std::vector<std::optional<ResolvedSite>>& sites,
                                      const std::filesystem::path& base_dir) {
  if (config.backend == "oracle") {
    std::vector<TrapSite> traps;
    for (const auto& s : sites) {
      if (s && s->trap) traps.push_back(*s->trap);
    }
    return std::make_shared<ScriptedBackend>(oracle_playbook(traps));
  }
  if (detail::istarts_with(config.backend, "scripted:")) {
    std::filesystem::path path = config.backend.substr(9);
    if (path.is_relative() && !std::filesystem::exists(path)) path = base_dir / path;
    json doc = json::parse(read_text(path), nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw ConfigError(path.string() + " is not JSON");
    return std::make_shared<ScriptedBackend>(ScriptedPlaybook::from_json(doc));
  }
  if (config.backend == "http") {
    auto http = HttpBackendConfig::from_env();
    http.merge_json(config.http);
    if (!config.policy.model_id.empty()) http.model_id = config.policy.model_id;
    return std::make_shared<HttpBackend>(http);
  }
  return nullptr;
}

std::unique_ptr<Environment> make_environment(const SuiteContext& ctx, std::size_t task_index) {
  const auto& env = ctx.config.env;
  if (env == "simulated") return std::make_unique<SimulatedEnvironment>(ctx.sites[task_index]->graph);
  std::string command = env.substr(5);
  detail::replace_all(command, "{start_url}", ctx.tasks[task_index].start_url);
  return std::make_unique<WireEnvironment>(std::make_unique<ProcessChannel>(command));
}

EvalInput eval_input_for(const SuiteContext& ctx, std::size_t task_index) {
  const auto& task = ctx.tasks[task_index];
  EvalInput in{task.task, task.gold_info, task.start_url};
  const auto& site = ctx.sites[task_index];
  if (site && site->trap) in.gold = site->trap->answer;
  return in;
}

std::vector<TranscriptEntry> replay_entries(const SuiteContext& ctx, const Job& job, bool eval_only) {
  RunConfig replay_cfg = ctx.config;
  replay_cfg.out = ctx.replay_root;
  const auto dir = repeat_dir(replay_cfg, job.repeat) / std::string(to_string(job.strategy));
  const auto path = episode_paths(dir, ctx.tasks[job.task_index].id).transcript;
  std::ifstream in(path);
  if (!in) throw BackendError(BackendError::Kind::kUnavailable, "no recorded transcript at " + path.string());
  auto entries = read_transcript_jsonl(in);
  if (eval_only) {
    std::erase_if(entries, [](const TranscriptEntry& e) { return e.request.role != Role::kEval; });
  }
  return entries;
}

JobResult run_job(const SuiteContext& ctx, const Job& job) {
  const auto& task = ctx.tasks[job.task_index];
  const auto dir = repeat_dir(ctx.config, job.repeat) / std::string(to_string(job.strategy));
  const auto paths = episode_paths(dir, task.id);
  const auto eval_in = eval_input_for(ctx, job.task_index);

  std::unique_ptr<Backend> replay;
  auto backend_for = [&](bool eval_only) -> Backend& {
    if (ctx.shared_backend) return *ctx.shared_backend;
    try {
      replay = std::make_unique<ReplayBackend>(replay_entries(ctx, job, eval_only));
    } catch (const BackendError&) {
      replay = std::make_unique<ReplayBackend>(std::vector<TranscriptEntry>{});
    }
    return *replay;
  };

  JobResult result;
  if (ctx.config.evaluate_only) {
    auto stored = load_episode(paths);
    if (!stored) return result;
    PolicyModules modules(backend_for(true), ctx.config.policy);
    auto eval = evaluate_trace(eval_in, stored->trace, modules);
    result.scored = ScoredTrace{std::move(stored->trace), std::move(eval)};
    return result;
  }
  if (auto stored = load_episode(paths)) {
    result.scored = ScoredTrace{std::move(stored->trace), std::move(stored->eval)};
    return result;
  }

  RecordingBackend recorder(backend_for(false));
  PolicyModules modules(recorder, ctx.config.policy);
  RunTrace trace;
  std::optional<EvalResult> eval;
  try {
    auto env = make_environment(ctx, job.task_index);
    trace = run_strategy(job.strategy, *env, modules, EpisodeInput{task.id, task.task, ctx.config.max_steps});
    eval = evaluate_trace(eval_in, trace, modules, &trace.warnings);
  } catch (const std::exception& e) {
    trace.task_id = task.id;
    trace.strategy = std::string(to_string(job.strategy));
    trace.failed = true;
    trace.error = e.what();
    trace.counters.steps_used = trace.steps.size();
  }
  persist_episode(paths, trace, eval, recorder.transcript());
  result.scored = ScoredTrace{std::move(trace), std::move(eval)};
  result.executed = true;
  return result;
}

}  // namespace

SuiteSummary run_suite(const RunConfig& config, std::ostream& log) {
  config.validate();
  const auto base_dir = config.tasks.has_parent_path() ? config.tasks.parent_path() : std::filesystem::path(".");

  std::set<std::string> exclusions;
  if (config.exclusions) exclusions = load_exclusions(*config.exclusions);
  auto ingest = ingest_tasks(config.tasks, exclusions);

  SuiteSummary summary;
  summary.dropped_tasks = ingest.dropped.size();
  summary.ingest_errors = ingest.errors;
  for (const auto& e : ingest.errors) log << "task file line " << e.line << ": " << e.message << "\n";
  if (ingest.tasks.empty()) throw ConfigError("no runnable tasks in " + config.tasks.string());

  SuiteContext ctx{config, std::move(ingest.tasks), {}, nullptr, {}};
  ctx.sites.resize(ctx.tasks.size());
  for (std::size_t i = 0; i < ctx.tasks.size(); ++i) {
    const bool need = config.env == "simulated" || config.backend == "oracle";
    if (need && (config.env == "simulated" || ctx.tasks[i].site)) {
      ctx.sites[i] = resolve_site(ctx.tasks[i], base_dir, config.seed);
    }
  }
  ctx.shared_backend = make_backend(config, ctx.sites, base_dir);
  if (!ctx.shared_backend) ctx.replay_root = config.backend.substr(7);

  std::vector<Job> jobs;
  for (std::size_t r = 1; r <= config.repeats; ++r) {
    for (auto s : config.strategies) {
      for (std::size_t i = 0; i < ctx.tasks.size(); ++i) jobs.push_back({r, s, i});
    }
  }
  std::vector<JobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      results[j] = run_job(ctx, jobs[j]);
      if (results[j].executed) {
        const auto& tr = results[j].scored->trace;
        std::lock_guard lock(log_mutex);
        log << "[" << tr.strategy << "] " << tr.task_id << " repeat " << jobs[j].repeat << ": steps "
            << tr.counters.steps_used << ", switches " << tr.counters.switches
            << (tr.failed ? ", failed: " + tr.error : "") << "\n";
      }
    }
  };
  const std::size_t threads = std::min(config.parallel, jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::map<std::size_t, std::vector<ScoredTrace>> by_repeat;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    auto& res = results[j];
    if (!res.scored) {
      ++summary.missing;
      continue;
    }
    if (res.executed) ++summary.executed;
    else if (!config.evaluate_only) ++summary.skipped;
    if (res.scored->trace.failed) ++summary.failed;
    by_repeat[jobs[j].repeat].push_back(std::move(*res.scored));
  }
  if (by_repeat.empty()) throw ConfigError("no stored traces found under " + config.out.string());
  std::vector<MetricsReport> reports;
  for (auto& [repeat, scored] : by_repeat) reports.push_back(aggregate(scored));
  summary.report = summarize_repeats(std::move(reports));
  write_file_atomic(config.out / "report.json", to_json(summary.report).dump(2) + "\n");
  return summary;
}

}  // namespace webnav
