#include <sstream>

#include "doctest.h"
#include "webnav/backend.hpp"
#include "webnav/errors.hpp"

using namespace webnav;

namespace {

ChatRequest req(Role role, std::string prompt) {
  ChatRequest r;
  r.role = role;
  r.prompt = std::move(prompt);
  return r;
}

ScriptedPlaybook pricing_playbook() {
  PlaybookRule rule{Role::kAction, {{std::string("Target Task"), "Find pricing"}}, "Action: click [5] {Pricing}"};
  return ScriptedPlaybook({rule}, ScriptedPlaybook::standard_defaults());
}

}  // namespace

TEST_CASE("extract_section reads up to the next blank line") {
  const char* text = "Intro\n\nTarget Task\nFind pricing\nfor plans\n\nAccessibility Tree\n[1] link 'x'";
  CHECK(extract_section(text, "Target Task") == "Find pricing\nfor plans");
  CHECK(extract_section(text, "Accessibility Tree") == "[1] link 'x'");
  CHECK_FALSE(extract_section(text, "Experience"));
}

TEST_CASE("scripted backend matches rules and falls back to defaults") {
  ScriptedBackend backend(pricing_playbook());
  CHECK(backend.complete(req(Role::kAction, "Target Task\nFind pricing\n\nmore")) == "Action: click [5] {Pricing}");
  CHECK(backend.complete(req(Role::kAction, "Target Task\nFind docs")) ==
        ScriptedPlaybook::standard_defaults().at(Role::kAction));
  // Section-scoped: the text elsewhere does not count.
  CHECK(backend.complete(req(Role::kAction, "Other\nFind pricing")) ==
        ScriptedPlaybook::standard_defaults().at(Role::kAction));
  // Role-scoped.
  CHECK(backend.complete(req(Role::kCritique, "Target Task\nFind pricing")) ==
        ScriptedPlaybook::standard_defaults().at(Role::kCritique));
}

TEST_CASE("playbook requires every default and round-trips through json") {
  CHECK_THROWS_AS(ScriptedPlaybook({}, {{Role::kAction, "x"}}), ConfigError);
  auto book = pricing_playbook();
  auto again = ScriptedPlaybook::from_json(book.to_json());
  CHECK(again.rules() == book.rules());
  CHECK(again.defaults() == book.defaults());
  CHECK_THROWS_AS(ScriptedPlaybook::from_json(nlohmann::json{{"rules", {{{"role", "pilot"}}}}}), ConfigError);
}

TEST_CASE("recording keeps one entry per call") {
  ScriptedBackend inner(pricing_playbook());
  RecordingBackend rec(inner);
  CHECK(rec.transcript().empty());
  rec.complete(req(Role::kAction, "Target Task\nFind pricing"));
  rec.complete(req(Role::kCritique, "anything"));
  auto log = rec.transcript();
  REQUIRE(log.size() == 2);
  CHECK(log[0].request.role == Role::kAction);
  CHECK(log[1].request.role == Role::kCritique);
}

TEST_CASE("replay serves the recording and rejects divergence") {
  ScriptedBackend inner(pricing_playbook());
  RecordingBackend rec(inner);
  rec.complete(req(Role::kAction, "Target Task\nFind pricing"));
  rec.complete(req(Role::kEval, "judge"));

  std::stringstream io;
  write_transcript_jsonl(io, rec.transcript());
  auto entries = read_transcript_jsonl(io);
  CHECK(entries == rec.transcript());

  ReplayBackend replay(entries);
  CHECK(replay.complete(req(Role::kAction, "Target Task\nFind pricing")) == "Action: click [5] {Pricing}");
  CHECK(replay.remaining() == 1);
  try {
    replay.complete(req(Role::kEval, "different"));
    FAIL("expected a protocol error");
  } catch (const BackendError& e) {
    CHECK(e.kind() == BackendError::Kind::kProtocol);
  }

  ReplayBackend empty({});
  CHECK_THROWS_AS(empty.complete(req(Role::kAction, "x")), BackendError);
}

TEST_CASE("malformed transcript lines are config errors") {
  std::stringstream io("{\"role\":\"action\"}\n");
  CHECK_THROWS_AS(read_transcript_jsonl(io), ConfigError);
}

TEST_CASE("role names") {
  for (auto r : kAllRoles) CHECK(role_from_string(to_string(r)) == r);
  CHECK_FALSE(role_from_string("pilot"));
}
