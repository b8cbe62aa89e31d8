#include "webnav/tasks.hpp"

#include <fstream>
#include <sstream>

#include "text_util.hpp"
#include "webnav/errors.hpp"

namespace webnav {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::vector<std::string_view> dot_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto dot = s.find('.', start);
    if (dot == std::string_view::npos) dot = s.size();
    if (dot > start) out.push_back(s.substr(start, dot - start));
    start = dot + 1;
  }
  return out;
}

}  // namespace

std::string normalize_host(std::string_view url_or_host) {
  std::string_view s = detail::trim(url_or_host);
  if (auto scheme = s.find("://"); scheme != std::string_view::npos) s.remove_prefix(scheme + 3);
  if (auto end = s.find_first_of("/?#"); end != std::string_view::npos) s = s.substr(0, end);
  if (auto at = s.rfind('@'); at != std::string_view::npos) s.remove_prefix(at + 1);
  if (auto colon = s.find(':'); colon != std::string_view::npos) s = s.substr(0, colon);
  std::string host = detail::to_lower(s);
  if (host.rfind("www.", 0) == 0) host.erase(0, 4);
  return host;
}

bool website_matches(std::string_view website, std::string_view key) {
  const std::string host = normalize_host(website);
  const std::string k = detail::to_lower(detail::trim(key));
  const auto h = dot_tokens(host);
  const auto kt = dot_tokens(k);
  if (kt.empty() || kt.size() > h.size()) return false;
  for (std::size_t i = 0; i + kt.size() <= h.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < kt.size() && all; ++j) all = h[i + j] == kt[j];
    if (all) return true;
  }
  return false;
}

std::set<std::string> parse_exclusions(std::istream& in) {
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto key = detail::trim(line);
    if (!key.empty()) out.insert(detail::to_lower(key));
  }
  return out;
}

std::set<std::string> load_exclusions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read exclusion list " + path.string());
  return parse_exclusions(in);
}

ordered_json to_json(const TaskSpec& task) {
  ordered_json j = {{"id", task.id}, {"task", task.task}, {"start_url", task.start_url}};
  j["gold_info"] = task.gold_info ? ordered_json(*task.gold_info) : ordered_json(nullptr);
  j["website"] = task.website;
  if (task.site) j["site"] = ordered_json::parse(task.site->dump());
  return j;
}

TaskSpec task_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("task entry must be a JSON object");
  try {
    TaskSpec t;
    t.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
    t.task = j.at("task").get<std::string>();
    t.start_url = j.at("start_url").get<std::string>();
    if (j.contains("gold_info") && !j["gold_info"].is_null()) {
      t.gold_info = j["gold_info"].is_string() ? j["gold_info"].get<std::string>() : j["gold_info"].dump();
    }
    t.website = j.value("website", std::string());
    if (t.website.empty()) t.website = normalize_host(t.start_url);
    if (j.contains("site") && !j["site"].is_null()) t.site = j["site"];
    if (t.id.empty()) throw ConfigError("task id must be non-empty");
    if (detail::trim(t.start_url).empty()) throw ConfigError("start_url must be non-empty");
    if (detail::trim(t.task).empty()) throw ConfigError("task text must be non-empty");
    return t;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed task: ") + e.what());
  }
}

IngestResult ingest_tasks(std::istream& in, const std::set<std::string>& exclusions) {
  IngestResult result;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      result.errors.push_back({line_no, "not valid JSON"});
      continue;
    }
    TaskSpec task;
    try {
      task = task_from_json(j);
    } catch (const ConfigError& e) {
      result.errors.push_back({line_no, e.what()});
      continue;
    }
    if (!seen.insert(task.id).second) {
      result.errors.push_back({line_no, "duplicate task id '" + task.id + "'"});
      continue;
    }
    bool excluded = false;
    for (const auto& key : exclusions) excluded = excluded || website_matches(task.website, key);
    if (excluded) {
      result.dropped.push_back(task.id);
      continue;
    }
    result.tasks.push_back(std::move(task));
  }
  return result;
}

IngestResult ingest_tasks(const std::filesystem::path& path, const std::set<std::string>& exclusions) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read task file " + path.string());
  return ingest_tasks(in, exclusions);
}

std::uint64_t effective_site_seed(std::uint64_t site_seed, std::uint64_t run_seed) {
  if (run_seed == 0) return site_seed;
  // splitmix64 finalizer over the pair.
  std::uint64_t z = site_seed ^ (run_seed * 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ResolvedSite resolve_site(const TaskSpec& task, const std::filesystem::path& base_dir, std::uint64_t run_seed) {
  if (!task.site) throw ConfigError("task '" + task.id + "' has no simulated site");
  const json& site = *task.site;
  try {
    if (site.contains("graph")) {
      std::filesystem::path path = site["graph"].get<std::string>();
      if (path.is_relative()) path = base_dir / path;
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot read site graph " + path.string());
      json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
      if (doc.is_discarded()) throw ConfigError(path.string() + " is not JSON");
      return {std::make_shared<const SiteGraph>(SiteGraph::from_json(doc)), std::nullopt};
    }
    if (site.contains("generate")) {
      const auto& g = site["generate"];
      const auto own_seed = g.at("seed").get<std::uint64_t>();
      const auto seed = effective_site_seed(own_seed, run_seed);
      auto params = trap_params_for_seed(seed);
      if (g.contains("depth")) params.depth = g["depth"].get<std::size_t>();
      if (g.contains("traps")) params.trap_count = g["traps"].get<std::size_t>();
      auto trap = generate_trap_site(seed, params.depth, params.trap_count, "trap-" + std::to_string(own_seed));
      auto graph = trap.graph;
      return {graph, std::move(trap)};
    }
  } catch (const json::exception& e) {
    throw ConfigError("task '" + task.id + "': malformed site spec: " + e.what());
  }
  throw ConfigError("task '" + task.id + "': site needs 'graph' or 'generate'");
}

std::vector<TaskSpec> generate_trap_tasks(std::uint64_t first_seed, std::size_t count) {
  std::vector<TaskSpec> tasks;
  for (std::size_t i = 0; i < count; ++i) {
    const auto seed = first_seed + i;
    const auto params = trap_params_for_seed(seed);
    const auto site = generate_trap_site(seed, params.depth, params.trap_count);
    TaskSpec t;
    t.id = site.tag;
    t.task = site.task_text();
    t.start_url = site.stage_urls.front();
    t.gold_info = site.answer;
    t.website = normalize_host(t.start_url);
    t.site = json{{"generate", {{"seed", seed}}}};
    tasks.push_back(std::move(t));
  }
  return tasks;
}

}  // namespace webnav
