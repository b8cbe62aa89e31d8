#include "webnav/action.hpp"

#include <type_traits>

#include "text_util.hpp"

namespace webnav {
namespace {

using detail::iequals;
using detail::is_space;
using detail::trim;

std::string fold_newlines(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

ParseError action_error(std::string message) {
  return ParseError{ParseError::Kind::kUnparseableAction, std::move(message)};
}

// Strips list markers ("- ", "* ", "1. ", "2) ") and markdown emphasis.
std::string_view strip_decorations(std::string_view line) {
  line = trim(line);
  bool changed = true;
  while (changed && !line.empty()) {
    changed = false;
    if (line.front() == '-' || line.front() == '*' || line.front() == '+' || line.front() == '#' ||
        line.front() == '>') {
      line.remove_prefix(1);
      line = trim(line);
      changed = true;
      continue;
    }
    if (line.substr(0, 3) == "\xE2\x80\xA2") {  // bullet
      line.remove_prefix(3);
      line = trim(line);
      changed = true;
      continue;
    }
    std::size_t digits = 0;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits > 0 && digits < line.size() && (line[digits] == '.' || line[digits] == ')') &&
        digits + 1 < line.size() && is_space(line[digits + 1])) {
      line.remove_prefix(digits + 1);
      line = trim(line);
      changed = true;
    }
  }
  while (!line.empty() && (line.front() == '_' || line.front() == '*')) line.remove_prefix(1);
  return line;
}

std::string_view strip_wrapping(std::string_view s) {
  s = trim(s);
  while (s.size() >= 2 && ((s.front() == '`' && s.back() == '`') || (s.front() == '"' && s.back() == '"') ||
                           (s.front() == '\'' && s.back() == '\''))) {
    s = trim(s.substr(1, s.size() - 2));
  }
  while (!s.empty() && s.front() == '`') s = trim(s.substr(1));
  while (!s.empty() && s.back() == '`') s = trim(s.substr(0, s.size() - 1));
  return s;
}

// Reads "[digits]" at the front of `rest`; advances past the bracket.
Expected<int, ParseError> read_element_id(std::string_view& rest) {
  rest = trim(rest);
  if (rest.empty() || rest.front() != '[') return action_error("expected '[id]' after verb");
  auto close = rest.find(']');
  if (close == std::string_view::npos) return action_error("unterminated element id");
  auto inner = trim(rest.substr(1, close - 1));
  rest.remove_prefix(close + 1);
  if (auto id = detail::parse_non_negative_int(inner)) return *id;
  if (iequals(inner, "id")) {
    return ParseError{ParseError::Kind::kPlaceholder, "placeholder '[id]' used instead of an element id"};
  }
  return action_error("element id is not a non-negative integer: '" + std::string(inner) + "'");
}

// Content between the first '{' and the last '}' of the line.
std::optional<std::string> read_braced(std::string_view rest) {
  rest = trim(rest);
  if (rest.empty() || rest.front() != '{') return std::nullopt;
  auto close = rest.rfind('}');
  if (close == std::string_view::npos || close == 0) return std::nullopt;
  return std::string(rest.substr(1, close - 1));
}

Expected<Action, ParseError> parse_stop(std::string_view rest) {
  rest = trim(rest);
  if (rest.empty() || rest.front() != '[') return action_error("stop requires '[answer]'");
  rest.remove_prefix(1);
  // Answer extends to the last ']' that is followed by "(summary)" or by nothing.
  if (!rest.empty() && rest.back() == ')') {
    for (std::size_t pos = rest.rfind(']'); pos != std::string_view::npos; pos = rest.rfind(']', pos - 1)) {
      auto tail = trim(rest.substr(pos + 1));
      if (!tail.empty() && tail.front() == '(' && tail.back() == ')') {
        return Stop{std::string(rest.substr(0, pos)), std::string(tail.substr(1, tail.size() - 2))};
      }
      if (pos == 0) break;
    }
  }
  auto close = rest.rfind(']');
  if (close == std::string_view::npos) return action_error("unterminated stop answer");
  return Stop{std::string(rest.substr(0, close)), ""};
}

Expected<Action, ParseError> parse_bare_action(std::string_view body) {
  body = strip_wrapping(body);
  if (body.empty()) return action_error("empty action");
  if (body.find('\n') != std::string_view::npos) return action_error("action spans multiple lines");

  std::size_t verb_end = 0;
  while (verb_end < body.size() && (std::isalpha(static_cast<unsigned char>(body[verb_end])) || body[verb_end] == '_')) {
    ++verb_end;
  }
  const std::string verb = detail::to_lower(body.substr(0, verb_end));
  std::string_view rest = body.substr(verb_end);

  if (verb == "click") {
    auto id = read_element_id(rest);
    if (!id) return id.error();
    auto name = read_braced(rest);
    return Click{*id, name.value_or("")};
  }
  if (verb == "type") {
    auto id = read_element_id(rest);
    if (!id) return id.error();
    auto text = read_braced(rest);
    if (!text) return action_error("type requires '{content}'");
    return Type{*id, *text};
  }
  if (verb == "scroll") {
    std::string_view dir = trim(rest);
    if (!dir.empty() && dir.front() == '[' && dir.back() == ']') dir = trim(dir.substr(1, dir.size() - 2));
    if (iequals(dir, "up")) return ScrollUp{};
    if (iequals(dir, "down")) return ScrollDown{};
    return action_error("scroll direction must be 'up' or 'down'");
  }
  auto rest_is_empty = [&] {
    auto r = trim(rest);
    return r.empty() || r == "." || r == "[]";
  };
  if (verb == "wait" && rest_is_empty()) return Wait{};
  if ((verb == "goback" || verb == "go_back") && rest_is_empty()) return GoBack{};
  if (verb == "go" && iequals(trim(rest), "back")) return GoBack{};
  if (verb == "restart" && rest_is_empty()) return Restart{};
  if (verb == "stop") return parse_stop(rest);
  return action_error("unknown action: '" + std::string(body.substr(0, 64)) + "'");
}

}  // namespace

std::string_view to_string(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::kUnparseableAction: return "unparseable-action";
    case ParseError::Kind::kPlaceholder: return "placeholder";
    case ParseError::Kind::kUnparseableCritique: return "unparseable-critique";
    case ParseError::Kind::kUnparseableRollback: return "unparseable-rollback";
    case ParseError::Kind::kUnparseableEval: return "unparseable-eval";
  }
  return "unknown";
}

std::optional<std::string> find_field(std::string_view text, std::string_view label) {
  std::optional<std::string> found;
  for (auto raw_line : detail::split_lines(text)) {
    auto line = strip_decorations(raw_line);
    if (!detail::istarts_with(line, label)) continue;
    auto rest = line.substr(label.size());
    while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
    rest = trim(rest);
    if (rest.empty() || rest.front() != ':') continue;
    rest.remove_prefix(1);
    while (!rest.empty() && (rest.front() == '*' || rest.front() == '_')) rest.remove_prefix(1);
    found = std::string(trim(rest));
  }
  return found;
}

std::string serialize_action(const Action& action) {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Click>) {
          return "click [" + std::to_string(a.id) + "] {" + fold_newlines(a.name) + "}";
        } else if constexpr (std::is_same_v<T, Type>) {
          return "type [" + std::to_string(a.id) + "] {" + fold_newlines(a.text) + "}";
        } else if constexpr (std::is_same_v<T, ScrollUp>) {
          return "scroll up";
        } else if constexpr (std::is_same_v<T, ScrollDown>) {
          return "scroll down";
        } else if constexpr (std::is_same_v<T, Wait>) {
          return "wait";
        } else if constexpr (std::is_same_v<T, GoBack>) {
          return "goback";
        } else if constexpr (std::is_same_v<T, Restart>) {
          return "restart";
        } else {
          return "stop [" + fold_newlines(a.answer) + "] (" + fold_newlines(a.summary) + ")";
        }
      },
      action);
}

std::string_view action_verb(const Action& a) {
  static constexpr std::string_view kVerbs[] = {"click", "type",    "scroll", "scroll",
                                                "wait",  "goback",  "restart", "stop"};
  return kVerbs[a.index()];
}

Expected<Action, ParseError> parse_action(std::string_view raw) {
  if (auto field = find_field(raw, "Action")) {
    std::string_view body = *field;
    if (trim(body).empty()) {
      // "Action:" on its own line, action on the next non-empty line.
      auto lines = detail::split_lines(raw);
      for (std::size_t i = lines.size(); i-- > 0;) {
        auto stripped = strip_decorations(lines[i]);
        if (detail::istarts_with(stripped, "Action")) {
          for (std::size_t j = i + 1; j < lines.size(); ++j) {
            if (!trim(lines[j]).empty()) return parse_bare_action(strip_decorations(lines[j]));
          }
          break;
        }
      }
      return action_error("empty Action field");
    }
    return parse_bare_action(body);
  }
  return parse_bare_action(trim(raw));
}

}  // namespace webnav
