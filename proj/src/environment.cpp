#include "webnav/environment.hpp"

#include <algorithm>
#include <deque>
#include <type_traits>

#include "webnav/errors.hpp"

namespace webnav {
namespace {

using nlohmann::json;

ElementKind parse_kind(const std::string& s) {
  if (s == "link") return ElementKind::kLink;
  if (s == "button") return ElementKind::kButton;
  if (s == "textbox") return ElementKind::kTextbox;
  if (s == "static" || s == "StaticText") return ElementKind::kStatic;
  throw ConfigError("unknown element kind '" + s + "'");
}

bool clickable(ElementKind k) { return k == ElementKind::kLink || k == ElementKind::kButton; }

Observation with_error(Observation obs, std::string message) {
  obs.error = std::move(message);
  return obs;
}

void navigate(EnvState& state, const std::string& target) {
  state.current_url = target;
  state.history.push_back(target);
  state.window_offset = 0;
  state.visited.insert(target);
}

// Looks up an element the agent can see right now.
const Element* visible_element(const Page& page, const EnvState& state, int id) {
  auto it = page.elements.find(id);
  if (it == page.elements.end() || it->second.window != state.window_offset) return nullptr;
  return &it->second;
}

std::string missing_element(int id) {
  return "element [" + std::to_string(id) + "] is not present in the current window; the page did not change";
}

}  // namespace

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::kLink: return "link";
    case ElementKind::kButton: return "button";
    case ElementKind::kTextbox: return "textbox";
    case ElementKind::kStatic: return "StaticText";
  }
  return "StaticText";
}

std::string observation_text(const Observation& obs) {
  std::string text = obs.axtree;
  if (obs.window_count > 1) {
    text += "\n(window " + std::to_string(obs.window_offset + 1) + " of " + std::to_string(obs.window_count) + ")";
  }
  if (obs.error) text += "\n[Notice] " + *obs.error;
  return text;
}

std::string observation_head(const Observation& obs, std::size_t max_bytes) {
  std::string flat;
  for (char c : obs.axtree) {
    if (c == '\n') {
      flat += " ; ";
    } else if (c != '\r') {
      flat += c;
    }
  }
  if (flat.size() <= max_bytes) return flat;
  std::size_t cut = max_bytes;
  // Do not split a UTF-8 sequence.
  while (cut > 0 && (static_cast<unsigned char>(flat[cut]) & 0xC0) == 0x80) --cut;
  return flat.substr(0, cut) + "...";
}

std::string render_window(const Page& page, std::size_t window) {
  std::string out = "RootWebArea '" + page.title + "'";
  for (const auto& [id, el] : page.elements) {
    if (el.window != window) continue;
    out += "\n[" + std::to_string(id) + "] " + std::string(to_string(el.kind)) + " '" + el.label + "'";
  }
  return out;
}

SiteGraph::SiteGraph(std::vector<Page> pages, std::string start_url, Goal goal, std::set<std::string> traps)
    : start_url_(std::move(start_url)), goal_(std::move(goal)), traps_(std::move(traps)) {
  for (auto& p : pages) {
    std::string url = p.url;
    if (!pages_.emplace(url, std::move(p)).second) throw ConfigError("duplicate page url '" + url + "'");
  }
  validate();
}

void SiteGraph::validate() const {
  if (pages_.find(start_url_) == pages_.end()) throw ConfigError("start_url '" + start_url_ + "' is not a page");
  for (const auto& [url, page] : pages_) {
    if (url.empty()) throw ConfigError("page with empty url");
    if (page.windows.empty()) throw ConfigError("page '" + url + "' has no windows");
    for (const auto& [id, el] : page.elements) {
      if (id < 0 || el.id != id) throw ConfigError("bad element id on page '" + url + "'");
      if (el.window >= page.windows.size()) {
        throw ConfigError("element [" + std::to_string(id) + "] on '" + url + "' refers to a missing window");
      }
      if (page.windows[el.window].find("[" + std::to_string(id) + "]") == std::string::npos) {
        throw ConfigError("element [" + std::to_string(id) + "] on '" + url + "' is not shown in its window");
      }
      if (!el.transition) continue;
      if (el.transition->on == Transition::On::kClick && !clickable(el.kind)) {
        throw ConfigError("element [" + std::to_string(id) + "] on '" + url + "': only links and buttons navigate on click");
      }
      if (el.transition->on == Transition::On::kType && el.kind != ElementKind::kTextbox) {
        throw ConfigError("element [" + std::to_string(id) + "] on '" + url + "': only textboxes navigate on type");
      }
      if (pages_.find(el.transition->target) == pages_.end()) {
        throw ConfigError("transition from '" + url + "' targets unknown page '" + el.transition->target + "'");
      }
    }
  }
  for (const auto& g : goal_.urls) {
    if (pages_.find(g) == pages_.end()) throw ConfigError("goal url '" + g + "' is not a page");
  }
  for (const auto& trap : traps_) {
    if (pages_.find(trap) == pages_.end()) throw ConfigError("trap url '" + trap + "' is not a page");
    for (const auto& reached : reachable_from(trap)) {
      if (goal_.urls.count(reached) != 0) {
        throw ConfigError("trap '" + trap + "' can reach goal page '" + reached + "'");
      }
    }
  }
}

const Page* SiteGraph::find_page(const std::string& url) const {
  auto it = pages_.find(url);
  return it == pages_.end() ? nullptr : &it->second;
}

const Page& SiteGraph::page(const std::string& url) const {
  const Page* p = find_page(url);
  if (p == nullptr) throw ContractViolation("unknown page '" + url + "'");
  return *p;
}

bool SiteGraph::is_goal(const std::string& url, const std::vector<TypedEntry>& typed_log) const {
  if (goal_.urls.count(url) == 0) return false;
  if (!goal_.required_text) return true;
  return std::any_of(typed_log.begin(), typed_log.end(), [&](const TypedEntry& e) {
    return e.text.find(*goal_.required_text) != std::string::npos;
  });
}

std::set<std::string> SiteGraph::reachable_from(const std::string& from) const {
  std::set<std::string> seen{from};
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    auto url = queue.front();
    queue.pop_front();
    const Page* p = find_page(url);
    if (p == nullptr) continue;
    for (const auto& [id, el] : p->elements) {
      if (el.transition && seen.insert(el.transition->target).second) queue.push_back(el.transition->target);
    }
  }
  return seen;
}

SiteGraph SiteGraph::from_json(const json& doc) {
  try {
    std::vector<Page> pages;
    for (const auto& jp : doc.at("pages")) {
      Page page;
      page.url = jp.at("url").get<std::string>();
      page.title = jp.value("title", page.url);
      std::size_t max_window = 0;
      for (const auto& je : jp.value("elements", json::array())) {
        Element el;
        el.id = je.at("id").get<int>();
        el.kind = parse_kind(je.at("kind").get<std::string>());
        el.label = je.value("label", "");
        el.window = je.value("window", std::size_t{0});
        max_window = std::max(max_window, el.window);
        if (je.contains("transition") && !je["transition"].is_null()) {
          const auto& jt = je["transition"];
          Transition t;
          const auto on = jt.value("on", std::string("click"));
          if (on == "click") {
            t.on = Transition::On::kClick;
          } else if (on == "type") {
            t.on = Transition::On::kType;
          } else {
            throw ConfigError("unknown transition trigger '" + on + "'");
          }
          t.target = jt.at("target").get<std::string>();
          el.transition = t;
        }
        if (!page.elements.emplace(el.id, el).second) {
          throw ConfigError("duplicate element id " + std::to_string(el.id) + " on page '" + page.url + "'");
        }
      }
      if (jp.contains("windows")) {
        page.windows = jp.at("windows").get<std::vector<std::string>>();
      } else {
        for (std::size_t w = 0; w <= max_window; ++w) page.windows.push_back(render_window(page, w));
      }
      pages.push_back(std::move(page));
    }
    Goal goal;
    if (doc.contains("goal")) {
      goal.urls = doc["goal"].value("urls", std::set<std::string>{});
      if (doc["goal"].contains("required_text") && !doc["goal"]["required_text"].is_null()) {
        goal.required_text = doc["goal"]["required_text"].get<std::string>();
      }
    }
    auto traps = doc.value("traps", std::set<std::string>{});
    return SiteGraph(std::move(pages), doc.at("start_url").get<std::string>(), std::move(goal), std::move(traps));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed site graph: ") + e.what());
  }
}

json SiteGraph::to_json() const {
  json pages = json::array();
  for (const auto& [url, page] : pages_) {
    json elements = json::array();
    for (const auto& [id, el] : page.elements) {
      json je = {{"id", id}, {"kind", std::string(to_string(el.kind))}, {"label", el.label}, {"window", el.window}};
      if (el.transition) {
        je["transition"] = {{"on", el.transition->on == Transition::On::kClick ? "click" : "type"},
                            {"target", el.transition->target}};
      }
      elements.push_back(std::move(je));
    }
    pages.push_back({{"url", url}, {"title", page.title}, {"windows", page.windows}, {"elements", elements}});
  }
  json goal = {{"urls", goal_.urls}};
  if (goal_.required_text) goal["required_text"] = *goal_.required_text;
  return {{"start_url", start_url_}, {"goal", goal}, {"traps", traps_}, {"pages", pages}};
}

Observation observe(const SiteGraph& graph, const EnvState& state) {
  const Page& page = graph.page(state.current_url);
  Observation obs;
  obs.url = state.current_url;
  obs.window_count = page.windows.size();
  obs.window_offset = std::min(state.window_offset, obs.window_count - 1);
  obs.axtree = page.windows[obs.window_offset];
  return obs;
}

std::pair<EnvState, Observation> simulate_reset(const SiteGraph& graph) {
  EnvState state;
  state.current_url = graph.start_url();
  state.history = {graph.start_url()};
  state.visited = {graph.start_url()};
  auto obs = observe(graph, state);
  return {std::move(state), std::move(obs)};
}

std::pair<EnvState, Observation> simulate_step(const SiteGraph& graph, EnvState state, const Action& action) {
  const Page& page = graph.page(state.current_url);
  std::optional<std::string> error;

  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Click>) {
          const Element* el = visible_element(page, state, a.id);
          if (el == nullptr) {
            error = missing_element(a.id);
          } else if (!clickable(el->kind)) {
            error = "element [" + std::to_string(a.id) + "] is a " + std::string(to_string(el->kind)) +
                    " and cannot be clicked; the page did not change";
          } else if (el->transition && el->transition->on == Transition::On::kClick) {
            navigate(state, el->transition->target);
          }
        } else if constexpr (std::is_same_v<T, Type>) {
          const Element* el = visible_element(page, state, a.id);
          if (el == nullptr) {
            error = missing_element(a.id);
          } else if (el->kind != ElementKind::kTextbox) {
            error = "element [" + std::to_string(a.id) + "] is a " + std::string(to_string(el->kind)) +
                    " and cannot be typed into; the page did not change";
          } else {
            state.typed_log.push_back({state.current_url, a.id, a.text});
            if (el->transition && el->transition->on == Transition::On::kType) navigate(state, el->transition->target);
          }
        } else if constexpr (std::is_same_v<T, ScrollUp>) {
          if (state.window_offset > 0) --state.window_offset;
        } else if constexpr (std::is_same_v<T, ScrollDown>) {
          if (state.window_offset + 1 < page.windows.size()) ++state.window_offset;
        } else if constexpr (std::is_same_v<T, Wait>) {
          // pure tick
        } else if constexpr (std::is_same_v<T, GoBack>) {
          if (state.history.size() > 1) {
            state.history.pop_back();
            state.current_url = state.history.back();
            state.window_offset = 0;
          }
        } else if constexpr (std::is_same_v<T, Restart>) {
          state.current_url = graph.start_url();
          state.history = {graph.start_url()};
          state.window_offset = 0;
        } else {
          throw ContractViolation("stop must be handled by the caller before stepping");
        }
      },
      action);

  auto obs = observe(graph, state);
  if (error) obs = with_error(std::move(obs), std::move(*error));
  return {std::move(state), std::move(obs)};
}

Expected<std::pair<EnvState, Observation>, std::string> simulate_rollback(const SiteGraph& graph, EnvState state,
                                                                          const std::string& target_url) {
  auto it = std::find(state.history.begin(), state.history.end(), target_url);
  if (it != state.history.end()) {
    state.history.erase(std::next(it), state.history.end());
  } else if (state.visited.count(target_url) != 0) {
    // Visited but popped from the back stack (goback/restart): navigate to it.
    state.history.push_back(target_url);
  } else {
    return std::string("rollback-failed: url '" + target_url + "' was never visited");
  }
  state.current_url = target_url;
  state.window_offset = 0;
  auto obs = observe(graph, state);
  return std::make_pair(std::move(state), std::move(obs));
}

SimulatedEnvironment::SimulatedEnvironment(std::shared_ptr<const SiteGraph> graph) : graph_(std::move(graph)) {
  if (!graph_) throw ContractViolation("SimulatedEnvironment requires a graph");
}

Observation SimulatedEnvironment::reset() {
  auto [state, obs] = simulate_reset(*graph_);
  state_ = std::move(state);
  started_ = true;
  return obs;
}

Observation SimulatedEnvironment::step(const Action& action) {
  if (!started_) throw ContractViolation("step before reset");
  auto [state, obs] = simulate_step(*graph_, std::move(state_), action);
  state_ = std::move(state);
  return obs;
}

Expected<Observation, std::string> SimulatedEnvironment::rollback(const std::string& target_url) {
  if (!started_) throw ContractViolation("rollback before reset");
  auto result = simulate_rollback(*graph_, state_, target_url);
  if (!result) return result.error();
  state_ = std::move(result->first);
  return std::move(result->second);
}

std::optional<bool> SimulatedEnvironment::goal_reached() const {
  if (!started_) return false;
  return graph_->is_goal(state_.current_url, state_.typed_log);
}

}  // namespace webnav
