#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "webnav/evaluation.hpp"
#include "webnav/http_backend.hpp"
#include "webnav/strategies.hpp"
#include "webnav/tasks.hpp"

namespace webnav {

struct RunConfig {
  std::vector<StrategyKind> strategies{StrategyKind::kOneWay, StrategyKind::kBestFirst, StrategyKind::kRollback};
  std::size_t max_steps = kDefaultMaxSteps;
  // oracle | scripted:<playbook.json> | http | replay:<run dir>
  std::string backend = "oracle";
  // simulated | live:<driver command>; "{start_url}" in the command is substituted
  std::string env = "simulated";
  std::filesystem::path tasks;
  std::filesystem::path out = "runs";
  std::optional<std::filesystem::path> exclusions;
  std::size_t parallel = 1;
  std::size_t repeats = 1;
  std::uint64_t seed = 0;
  bool evaluate_only = false;
  std::string report_format = "table";  // json | table
  PolicySettings policy;
  nlohmann::json http = nlohmann::json::object();  // merged over HttpBackendConfig::from_env()

  // Throws ConfigError.
  void validate() const;
};

// Keys mirror the long flag names with underscores: strategies, max_steps,
// backend, env, tasks, out, exclusions, parallel, repeats, seed,
// evaluate_only, report_format, policy{temperature, max_output_tokens,
// model_id}, http{...}. Relative paths resolve against `base_dir`.
void merge_config_json(RunConfig& config, const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct SuiteSummary {
  ReplicatedReport report;
  std::size_t executed = 0;  // episodes run in this invocation
  std::size_t skipped = 0;   // episodes resumed from disk
  std::size_t missing = 0;   // evaluate-only episodes with no stored trace
  std::size_t failed = 0;
  std::size_t dropped_tasks = 0;
  std::vector<IngestError> ingest_errors;
};

// Runs every task x strategy x repeat that has no stored run file, persists
// traces under <out>[/repeat-<k>]/<strategy>/, then writes <out>/report.json.
// Throws ConfigError for configuration problems only.
SuiteSummary run_suite(const RunConfig& config, std::ostream& log);

// Directory for one repeat (1-based).
std::filesystem::path repeat_dir(const RunConfig& config, std::size_t repeat);

}  // namespace webnav
