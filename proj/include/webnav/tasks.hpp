#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "webnav/trap_graph.hpp"

namespace webnav {

struct TaskSpec {
  std::string id;
  std::string task;
  std::string start_url;
  std::optional<std::string> gold_info;
  std::string website;  // exclusion key; derived from start_url when absent
  // Simulated site: {"graph": "<path>"} or {"generate": {"seed", "depth"?, "traps"?}}.
  std::optional<nlohmann::json> site;

  bool operator==(const TaskSpec&) const = default;
};

struct IngestError {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<TaskSpec> tasks;
  std::vector<IngestError> errors;
  std::vector<std::string> dropped;  // ids removed by the exclusion list
};

// Lower-cased host of a URL or bare domain, without a leading "www.".
std::string normalize_host(std::string_view url_or_host);

// True when the dot-separated tokens of `key` occur contiguously in the
// tokens of the website host ("finance.yahoo" matches "finance.yahoo.com").
bool website_matches(std::string_view website, std::string_view key);

std::set<std::string> parse_exclusions(std::istream& in);
// Throws ConfigError when the file cannot be read.
std::set<std::string> load_exclusions(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const TaskSpec& task);
TaskSpec task_from_json(const nlohmann::json& j);  // throws ConfigError

// Per-line isolation: malformed lines and duplicate ids become errors and the
// rest of the file is still read.
IngestResult ingest_tasks(std::istream& in, const std::set<std::string>& exclusions);
IngestResult ingest_tasks(const std::filesystem::path& path, const std::set<std::string>& exclusions);

// Seed of a generated site under a run seed; run seed 0 keeps the task's own.
std::uint64_t effective_site_seed(std::uint64_t site_seed, std::uint64_t run_seed);

struct ResolvedSite {
  std::shared_ptr<const SiteGraph> graph;
  std::optional<TrapSite> trap;  // set for generated sites
};

// Fixture paths are relative to `base_dir`. Throws ConfigError.
ResolvedSite resolve_site(const TaskSpec& task, const std::filesystem::path& base_dir, std::uint64_t run_seed);

// Tasks over generated trap sites: ids "trap-<seed>" for seeds first..first+count-1.
std::vector<TaskSpec> generate_trap_tasks(std::uint64_t first_seed, std::size_t count);

}  // namespace webnav
