#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace webnav {

enum class Role { kAction, kCritique, kRollback, kEval };

std::string_view to_string(Role role);
std::optional<Role> role_from_string(std::string_view s);

inline constexpr Role kAllRoles[] = {Role::kAction, Role::kCritique, Role::kRollback, Role::kEval};

struct ChatRequest {
  Role role = Role::kAction;
  std::string prompt;
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::string model_id;

  bool operator==(const ChatRequest&) const = default;
};

// Uniform completion interface. Implementations shared across episodes must be
// safe to call concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  // Throws BackendError.
  virtual std::string complete(const ChatRequest& request) = 0;
};

// Lines following a line equal to `header`, up to the next blank line.
std::optional<std::string> extract_section(std::string_view text, std::string_view header);

struct MatchCondition {
  std::optional<std::string> section;  // restrict the search to one prompt section
  std::string contains;
  bool operator==(const MatchCondition&) const = default;
};

struct PlaybookRule {
  Role role = Role::kAction;
  std::vector<MatchCondition> when;  // all must hold
  std::string response;
  bool operator==(const PlaybookRule&) const = default;
};

// Ordered rules, first match wins, with a default reply per role.
class ScriptedPlaybook {
 public:
  // Throws ConfigError unless every role has a default.
  ScriptedPlaybook(std::vector<PlaybookRule> rules, std::map<Role, std::string> defaults);

  static ScriptedPlaybook from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  // Conservative replies: stop with N/A, continue at 3.0, revert to <0>, score 0.0.
  static std::map<Role, std::string> standard_defaults();

  const std::string& respond(const ChatRequest& request) const;

  const std::vector<PlaybookRule>& rules() const { return rules_; }
  const std::map<Role, std::string>& defaults() const { return defaults_; }

  void append(const ScriptedPlaybook& other);

 private:
  std::vector<PlaybookRule> rules_;
  std::map<Role, std::string> defaults_;
};

bool rule_matches(const PlaybookRule& rule, const ChatRequest& request);

class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(ScriptedPlaybook playbook) : playbook_(std::move(playbook)) {}
  std::string complete(const ChatRequest& request) override { return playbook_.respond(request); }
  const ScriptedPlaybook& playbook() const { return playbook_; }

 private:
  ScriptedPlaybook playbook_;
};

struct TranscriptEntry {
  ChatRequest request;
  std::string response;
  bool operator==(const TranscriptEntry&) const = default;
};

// Forwards to another backend and keeps an ordered log of every exchange.
class RecordingBackend final : public Backend {
 public:
  explicit RecordingBackend(Backend& inner) : inner_(&inner) {}
  std::string complete(const ChatRequest& request) override;
  std::vector<TranscriptEntry> transcript() const;

 private:
  Backend* inner_;
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> log_;
};

// Serves a recorded transcript back in order; diverging requests are a
// protocol error.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}
  std::string complete(const ChatRequest& request) override;
  std::size_t remaining() const;

 private:
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
  std::size_t next_ = 0;
};

nlohmann::json to_json(const TranscriptEntry& entry);
TranscriptEntry transcript_entry_from_json(const nlohmann::json& j);
void write_transcript_jsonl(std::ostream& out, const std::vector<TranscriptEntry>& entries);
// Throws ConfigError on malformed lines.
std::vector<TranscriptEntry> read_transcript_jsonl(std::istream& in);

}  // namespace webnav
