#pragma once

// Shared helpers for unit and acceptance tests.

#include <unistd.h>

#include <atomic>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "webnav/backend.hpp"
#include "webnav/environment.hpp"
#include "webnav/errors.hpp"

namespace webnav::testing {

// Replies from per-role queues in order; an empty queue serves the role's
// fallback (or throws when none is set). Every prompt is kept.
class SequenceBackend final : public Backend {
 public:
  void push(Role role, std::string reply) { queues_[role].push_back(std::move(reply)); }
  void set_fallback(Role role, std::string reply) { fallback_[role] = std::move(reply); }

  std::string complete(const ChatRequest& request) override {
    std::lock_guard<std::mutex> lock(mutex_);
    prompts_[request.role].push_back(request.prompt);
    auto& q = queues_[request.role];
    if (!q.empty()) {
      auto reply = std::move(q.front());
      q.pop_front();
      return reply;
    }
    auto it = fallback_.find(request.role);
    if (it == fallback_.end()) throw BackendError(BackendError::Kind::kNoMatch, "sequence exhausted");
    return it->second;
  }

  const std::vector<std::string>& prompts(Role role) { return prompts_[role]; }
  std::size_t calls(Role role) { return prompts_[role].size(); }

 private:
  std::mutex mutex_;
  std::map<Role, std::deque<std::string>> queues_;
  std::map<Role, std::string> fallback_;
  std::map<Role, std::vector<std::string>> prompts_;
};

// Page description for graph_from_links: url -> list of (label, target).
using LinkSpec = std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>;

// Builds a graph where every page shows its links as [1], [2], ... in one window.
inline SiteGraph graph_from_links(const LinkSpec& spec, const std::string& start, std::set<std::string> goal,
                                  std::set<std::string> traps = {}) {
  nlohmann::json pages = nlohmann::json::array();
  for (const auto& [url, links] : spec) {
    nlohmann::json elements = nlohmann::json::array();
    int id = 1;
    for (const auto& [label, target] : links) {
      elements.push_back({{"id", id++}, {"kind", "link"}, {"label", label}, {"transition", {{"target", target}}}});
    }
    pages.push_back({{"url", url}, {"title", url}, {"elements", elements}});
  }
  nlohmann::json doc = {{"start_url", start}, {"goal", {{"urls", goal}}}, {"traps", traps}, {"pages", pages}};
  return SiteGraph::from_json(doc);
}

// A -> B -> C chain with C the goal.
inline std::shared_ptr<const SiteGraph> chain_abc() {
  return std::make_shared<const SiteGraph>(graph_from_links(
      {{"http://s/A", {{"to B", "http://s/B"}}}, {"http://s/B", {{"to C", "http://s/C"}}}, {"http://s/C", {}}},
      "http://s/A", {"http://s/C"}));
}

inline std::filesystem::path fresh_temp_dir(const std::string& label) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("webnav-" + label + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

// Critique reply in the format the parser expects.
inline std::string critique_reply(double score, const std::string& decision, const std::string& details = "") {
  std::ostringstream ss;
  ss << "Observation: ok\nDetails: " << details << "\nCritic: checked\nScore: " << score << "\nAction: " << decision;
  return ss.str();
}

}  // namespace webnav::testing
