#include "doctest.h"
#include "webnav/action.hpp"

using namespace webnav;

TEST_CASE("parse_action reads the grammar examples") {
  auto click = parse_action("Action: click [42] {Submit}");
  REQUIRE(click);
  CHECK(*click == Action{Click{42, "Submit"}});

  auto stop = parse_action("Action: stop [N/A] (searched twice, nothing found)");
  REQUIRE(stop);
  CHECK(*stop == Action{Stop{"N/A", "searched twice, nothing found"}});

  auto fly = parse_action("Action: fly [1]");
  REQUIRE_FALSE(fly);
  CHECK(fly.error().kind == ParseError::Kind::kUnparseableAction);
}

TEST_CASE("placeholder ids are rejected with their own error kind") {
  auto r = parse_action("Action: click [id] {Search}");
  REQUIRE_FALSE(r);
  CHECK(r.error().kind == ParseError::Kind::kPlaceholder);
}

TEST_CASE("serialize_action literals") {
  CHECK(serialize_action(ScrollDown{}) == "scroll down");
  CHECK(serialize_action(ScrollUp{}) == "scroll up");
  CHECK(serialize_action(Type{7, "best pizza"}) == "type [7] {best pizza}");
  CHECK(serialize_action(Click{0, ""}) == "click [0] {}");
  CHECK(serialize_action(Wait{}) == "wait");
  CHECK(serialize_action(GoBack{}) == "goback");
  CHECK(serialize_action(Restart{}) == "restart");
  CHECK(serialize_action(Stop{"42", "done"}) == "stop [42] (done)");
}

TEST_CASE("the last Action field wins in a full model reply") {
  const char* reply =
      "FirstThought: the search box is at [3]\n"
      "Action: click [3] {Search}\n"
      "Thought: actually type first\n"
      "**Action:** type [3] {red shoes}\n";
  auto r = parse_action(reply);
  REQUIRE(r);
  CHECK(*r == Action{Type{3, "red shoes"}});
}

TEST_CASE("decorated and bare forms") {
  CHECK(*parse_action("- Action: `goback`") == Action{GoBack{}});
  CHECK(*parse_action("scroll [down]") == Action{ScrollDown{}});
  CHECK(*parse_action("Action:\n\nrestart") == Action{Restart{}});
  CHECK(*parse_action("stop [a] b]") == Action{Stop{"a] b", ""}});
  CHECK_FALSE(parse_action(""));
  CHECK_FALSE(parse_action("type [3]"));
  CHECK_FALSE(parse_action("scroll sideways"));
}

TEST_CASE("newlines are folded on serialization") {
  CHECK(serialize_action(Type{1, "a\nb"}) == "type [1] {a b}");
}

TEST_CASE("find_field returns the last matching line") {
  CHECK(find_field("Score: 1\nscore: 2", "Score") == "2");
  CHECK_FALSE(find_field("Scores 3", "Score"));
  CHECK(action_verb(ScrollUp{}) == "scroll");
}
