#include "webnav/trajectory.hpp"

#include "webnav/errors.hpp"

namespace webnav {
namespace {

// Escapes backslashes and line breaks so each state renders on one line.
std::string one_line(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string state_body(const NavState& s) {
  std::string line = "action: ";
  line += s.action_taken ? one_line(serialize_action(*s.action_taken)) : "(start)";
  line += " | url: ";
  line += one_line(s.url);
  line += " | observation: ";
  line += one_line(s.obs_digest);
  return line;
}

}  // namespace

const NavState& Trajectory::at(std::size_t i) const {
  if (i >= states_.size()) {
    throw IndexError("state index " + std::to_string(i) + " out of range (size " + std::to_string(states_.size()) + ")");
  }
  return states_[i];
}

const NavState& Trajectory::back() const {
  if (states_.empty()) throw IndexError("trajectory is empty");
  return states_.back();
}

void Trajectory::append_state(NavState state) {
  if (state.index != states_.size()) {
    throw ContractViolation("append_state: state index " + std::to_string(state.index) + " != trajectory length " +
                            std::to_string(states_.size()));
  }
  if (state.checkpoint && state.url.empty()) {
    throw ContractViolation("append_state: checkpoint state without URL");
  }
  states_.push_back(std::move(state));
}

void Trajectory::rollback_to(std::size_t i) {
  if (i >= states_.size()) {
    throw IndexError("rollback_to: index " + std::to_string(i) + " out of range (size " +
                     std::to_string(states_.size()) + ")");
  }
  if (!states_[i].checkpoint) {
    throw InvalidTargetError("rollback_to: state " + std::to_string(i) + " is not a checkpoint");
  }
  states_.resize(i + 1);
}

void Trajectory::record_tried_action(std::size_t i, const Action& action) {
  if (i >= states_.size()) {
    throw IndexError("record_tried_action: index " + std::to_string(i) + " out of range (size " +
                     std::to_string(states_.size()) + ")");
  }
  states_[i].tried_actions.insert(serialize_action(action));
}

void Trajectory::add_experience(ExperienceNote note) {
  if (note.returned_to_index >= note.created_at_step) {
    throw ContractViolation("experience note must point to an earlier step");
  }
  experiences_.push_back(std::move(note));
}

std::string render_trace_review(const Trajectory& traj) {
  std::string out;
  for (const auto& s : traj.states()) {
    out += "Step " + std::to_string(s.index) + " | " + state_body(s) + "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string render_indexed_trace(const Trajectory& traj) {
  std::string out;
  for (const auto& s : traj.states()) {
    out += "<" + std::to_string(s.index) + "> " + state_body(s);
    if (s.checkpoint) {
      out += " ";
      out += kCheckpointMarker;
    }
    out += "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace webnav
