#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "webnav/action.hpp"
#include "webnav/expected.hpp"

namespace webnav {

// What the agent sees: the accessibility tree restricted to one window.
struct Observation {
  std::string url;
  std::string axtree;
  std::size_t window_offset = 0;
  std::size_t window_count = 1;
  std::optional<std::string> error;  // inline notice for an ignored interaction

  bool operator==(const Observation&) const = default;
};

// Text handed to prompts: the tree plus window position and error notice.
std::string observation_text(const Observation& obs);

// Fixed-size, single-line head of the observation, used as a digest when no
// critique ran.
std::string observation_head(const Observation& obs, std::size_t max_bytes = 160);

enum class ElementKind { kLink, kButton, kTextbox, kStatic };

std::string_view to_string(ElementKind kind);

struct Transition {
  enum class On { kClick, kType };
  On on = On::kClick;
  std::string target;
  bool operator==(const Transition&) const = default;
};

struct Element {
  int id = 0;
  ElementKind kind = ElementKind::kStatic;
  std::string label;
  std::size_t window = 0;
  std::optional<Transition> transition;
  bool operator==(const Element&) const = default;
};

struct Page {
  std::string url;
  std::string title;
  std::vector<std::string> windows;  // accessibility-tree text per scroll window
  std::map<int, Element> elements;
  bool operator==(const Page&) const = default;
};

// Renders a window from its elements: "RootWebArea 'title'" then "[id] kind 'label'".
std::string render_window(const Page& page, std::size_t window);

struct Goal {
  std::set<std::string> urls;
  std::optional<std::string> required_text;  // must occur in some typed entry
  bool operator==(const Goal&) const = default;
};

struct TypedEntry {
  std::string url;
  int element_id = 0;
  std::string text;
  bool operator==(const TypedEntry&) const = default;
};

// Deterministic stand-in for a website. Validated on construction.
class SiteGraph {
 public:
  // Throws ConfigError on any invariant violation.
  SiteGraph(std::vector<Page> pages, std::string start_url, Goal goal, std::set<std::string> traps);

  static SiteGraph from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  const std::string& start_url() const { return start_url_; }
  const Goal& goal() const { return goal_; }
  const std::set<std::string>& traps() const { return traps_; }
  const std::map<std::string, Page>& pages() const { return pages_; }
  const Page* find_page(const std::string& url) const;
  const Page& page(const std::string& url) const;

  bool is_goal(const std::string& url, const std::vector<TypedEntry>& typed_log) const;

  // Breadth-first closure over click/type transitions, including `from`.
  std::set<std::string> reachable_from(const std::string& from) const;

  bool operator==(const SiteGraph&) const = default;

 private:
  void validate() const;

  std::map<std::string, Page> pages_;
  std::string start_url_;
  Goal goal_;
  std::set<std::string> traps_;
};

// Browser-side state of one simulated episode.
struct EnvState {
  std::string current_url;
  std::vector<std::string> history;  // back stack; top == current_url
  std::size_t window_offset = 0;
  std::vector<TypedEntry> typed_log;
  std::set<std::string> visited;
  bool operator==(const EnvState&) const = default;
};

// Pure simulation functions. The environment classes below wrap them.
std::pair<EnvState, Observation> simulate_reset(const SiteGraph& graph);
// Throws ContractViolation for Stop.
std::pair<EnvState, Observation> simulate_step(const SiteGraph& graph, EnvState state, const Action& action);
// Fails with a message when target_url was never visited.
Expected<std::pair<EnvState, Observation>, std::string> simulate_rollback(const SiteGraph& graph, EnvState state,
                                                                          const std::string& target_url);
Observation observe(const SiteGraph& graph, const EnvState& state);

// observe / step / rollback contract shared by simulated and live backends.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual Observation reset() = 0;
  // Precondition: action is not Stop. Throws EnvironmentError when the
  // environment itself fails; invalid interactions come back as error notices.
  virtual Observation step(const Action& action) = 0;
  // URL-granular revert. Error string when the URL cannot be restored.
  virtual Expected<Observation, std::string> rollback(const std::string& target_url) = 0;
  // Whether the goal predicate holds, when the environment can tell.
  virtual std::optional<bool> goal_reached() const { return std::nullopt; }
};

class SimulatedEnvironment final : public Environment {
 public:
  explicit SimulatedEnvironment(std::shared_ptr<const SiteGraph> graph);

  Observation reset() override;
  Observation step(const Action& action) override;
  Expected<Observation, std::string> rollback(const std::string& target_url) override;
  std::optional<bool> goal_reached() const override;

  const EnvState& state() const { return state_; }
  const SiteGraph& graph() const { return *graph_; }

 private:
  std::shared_ptr<const SiteGraph> graph_;
  EnvState state_;
  bool started_ = false;
};

}  // namespace webnav
