#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "webnav/expected.hpp"

namespace webnav {

struct ParseError {
  enum class Kind {
    kUnparseableAction,
    kPlaceholder,
    kUnparseableCritique,
    kUnparseableRollback,
    kUnparseableEval,
  };

  Kind kind;
  std::string message;
};

std::string_view to_string(ParseError::Kind kind);

// Action grammar understood by the agent:
//   click [id] {link name}   type [id] {content}   scroll up | scroll down
//   wait   goback   restart   stop [answer] (summary)
struct Click {
  int id = 0;
  std::string name;
  bool operator==(const Click&) const = default;
};

struct Type {
  int id = 0;
  std::string text;
  bool operator==(const Type&) const = default;
};

struct ScrollUp {
  bool operator==(const ScrollUp&) const = default;
};
struct ScrollDown {
  bool operator==(const ScrollDown&) const = default;
};
struct Wait {
  bool operator==(const Wait&) const = default;
};
struct GoBack {
  bool operator==(const GoBack&) const = default;
};
struct Restart {
  bool operator==(const Restart&) const = default;
};

struct Stop {
  std::string answer;
  std::string summary;
  bool operator==(const Stop&) const = default;
};

using Action = std::variant<Click, Type, ScrollUp, ScrollDown, Wait, GoBack, Restart, Stop>;

// Canonical single-line form. Newlines inside texts are folded to spaces.
std::string serialize_action(const Action& action);

// Accepts either a model reply holding an "Action:" field (last one wins) or a
// bare action string. Never throws.
Expected<Action, ParseError> parse_action(std::string_view raw);

inline bool is_stop(const Action& a) { return std::holds_alternative<Stop>(a); }

// Lowercase verb of the action ("click", "scroll", ...).
std::string_view action_verb(const Action& a);

// Last line of `text` of the form "<label>: value", tolerant of list markers,
// markdown emphasis and label case. Returns the trimmed value.
std::optional<std::string> find_field(std::string_view text, std::string_view label);

}  // namespace webnav
