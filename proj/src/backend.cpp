#include "webnav/backend.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "text_util.hpp"
#include "webnav/errors.hpp"

namespace webnav {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kAction: return "action";
    case Role::kCritique: return "critique";
    case Role::kRollback: return "rollback";
    case Role::kEval: return "eval";
  }
  return "action";
}

std::optional<Role> role_from_string(std::string_view s) {
  for (Role r : kAllRoles) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::optional<std::string> extract_section(std::string_view text, std::string_view header) {
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = lines[i];
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.remove_suffix(1);
    if (line != header) continue;
    std::string body;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (detail::trim(lines[j]).empty()) break;
      if (!body.empty()) body += '\n';
      body += lines[j];
    }
    return body;
  }
  return std::nullopt;
}

bool rule_matches(const PlaybookRule& rule, const ChatRequest& request) {
  if (rule.role != request.role) return false;
  return std::all_of(rule.when.begin(), rule.when.end(), [&](const MatchCondition& c) {
    if (!c.section) return request.prompt.find(c.contains) != std::string::npos;
    auto body = extract_section(request.prompt, *c.section);
    return body && body->find(c.contains) != std::string::npos;
  });
}

ScriptedPlaybook::ScriptedPlaybook(std::vector<PlaybookRule> rules, std::map<Role, std::string> defaults)
    : rules_(std::move(rules)), defaults_(std::move(defaults)) {
  for (Role r : kAllRoles) {
    if (defaults_.find(r) == defaults_.end()) {
      throw ConfigError("playbook has no default reply for role '" + std::string(to_string(r)) + "'");
    }
  }
}

std::map<Role, std::string> ScriptedPlaybook::standard_defaults() {
  return {
      {Role::kAction, "Thought: No scripted rule applies.\nAction: stop [N/A] (no scripted rule applies)"},
      {Role::kCritique, "Observation: unchanged\nDetails: No useful information\nCritic: no scripted rule\nScore: 3.0\nAction: continue"},
      {Role::kRollback, "Analysis: no scripted rule\nBackIdx: <0>\nExperience: Returned to the start."},
      {Role::kEval, "Summary: no scripted rule\nThought: no scripted rule\nCriteria: none\nScore: 0.0"},
  };
}

const std::string& ScriptedPlaybook::respond(const ChatRequest& request) const {
  for (const auto& rule : rules_) {
    if (rule_matches(rule, request)) return rule.response;
  }
  return defaults_.at(request.role);
}

void ScriptedPlaybook::append(const ScriptedPlaybook& other) {
  rules_.insert(rules_.end(), other.rules_.begin(), other.rules_.end());
}

ScriptedPlaybook ScriptedPlaybook::from_json(const json& doc) {
  try {
    std::map<Role, std::string> defaults;
    if (doc.contains("defaults")) {
      for (const auto& [key, value] : doc["defaults"].items()) {
        auto role = role_from_string(key);
        if (!role) throw ConfigError("unknown role '" + key + "' in playbook defaults");
        defaults[*role] = value.get<std::string>();
      }
    }
    std::vector<PlaybookRule> rules;
    for (const auto& jr : doc.value("rules", json::array())) {
      PlaybookRule rule;
      auto role = role_from_string(jr.at("role").get<std::string>());
      if (!role) throw ConfigError("unknown role in playbook rule");
      rule.role = *role;
      for (const auto& jc : jr.value("when", json::array())) {
        MatchCondition c;
        if (jc.contains("section") && !jc["section"].is_null()) c.section = jc["section"].get<std::string>();
        c.contains = jc.at("contains").get<std::string>();
        rule.when.push_back(std::move(c));
      }
      rule.response = jr.at("response").get<std::string>();
      rules.push_back(std::move(rule));
    }
    return ScriptedPlaybook(std::move(rules), std::move(defaults));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed playbook: ") + e.what());
  }
}

json ScriptedPlaybook::to_json() const {
  json defaults = json::object();
  for (const auto& [role, text] : defaults_) defaults[std::string(to_string(role))] = text;
  json rules = json::array();
  for (const auto& rule : rules_) {
    json when = json::array();
    for (const auto& c : rule.when) {
      json jc = {{"contains", c.contains}};
      if (c.section) jc["section"] = *c.section;
      when.push_back(std::move(jc));
    }
    rules.push_back({{"role", std::string(to_string(rule.role))}, {"when", when}, {"response", rule.response}});
  }
  return {{"defaults", defaults}, {"rules", rules}};
}

std::string RecordingBackend::complete(const ChatRequest& request) {
  auto response = inner_->complete(request);
  std::lock_guard lock(mutex_);
  log_.push_back({request, response});
  return response;
}

std::vector<TranscriptEntry> RecordingBackend::transcript() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::string ReplayBackend::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  if (next_ >= entries_.size()) {
    throw BackendError(BackendError::Kind::kProtocol, "replay transcript exhausted");
  }
  const auto& entry = entries_[next_];
  if (entry.request.role != request.role || entry.request.prompt != request.prompt) {
    throw BackendError(BackendError::Kind::kProtocol,
                       "replay diverged at entry " + std::to_string(next_) + " (role " +
                           std::string(to_string(request.role)) + ")");
  }
  ++next_;
  return entry.response;
}

std::size_t ReplayBackend::remaining() const {
  std::lock_guard lock(mutex_);
  return entries_.size() - next_;
}

json to_json(const TranscriptEntry& entry) {
  json j;
  j["role"] = std::string(to_string(entry.request.role));
  j["model_id"] = entry.request.model_id;
  j["temperature"] = entry.request.temperature;
  j["max_output_tokens"] = entry.request.max_output_tokens;
  j["prompt"] = entry.request.prompt;
  j["response"] = entry.response;
  return j;
}

TranscriptEntry transcript_entry_from_json(const json& j) {
  TranscriptEntry entry;
  auto role = role_from_string(j.at("role").get<std::string>());
  if (!role) throw ConfigError("unknown role in transcript");
  entry.request.role = *role;
  entry.request.model_id = j.value("model_id", "");
  entry.request.temperature = j.value("temperature", 0.0);
  entry.request.max_output_tokens = j.value("max_output_tokens", 1024);
  entry.request.prompt = j.at("prompt").get<std::string>();
  entry.response = j.at("response").get<std::string>();
  return entry;
}

void write_transcript_jsonl(std::ostream& out, const std::vector<TranscriptEntry>& entries) {
  for (const auto& e : entries) out << to_json(e).dump() << '\n';
}

std::vector<TranscriptEntry> read_transcript_jsonl(std::istream& in) {
  std::vector<TranscriptEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      entries.push_back(transcript_entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ConfigError("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

}  // namespace webnav
