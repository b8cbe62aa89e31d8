#include "webnav/wire.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "webnav/errors.hpp"

namespace webnav {

using nlohmann::json;

nlohmann::json observation_to_wire(const Observation& obs) {
  json j = {{"url", obs.url},
            {"axtree", obs.axtree},
            {"window_offset", obs.window_offset},
            {"window_count", obs.window_count}};
  if (obs.error) j["error"] = *obs.error;
  return j;
}

Observation observation_from_wire(const nlohmann::json& response) {
  try {
    Observation obs;
    obs.url = response.at("url").get<std::string>();
    obs.axtree = response.at("axtree").get<std::string>();
    obs.window_offset = response.value("window_offset", std::size_t{0});
    obs.window_count = response.value("window_count", std::size_t{1});
    if (obs.window_count == 0 || obs.window_offset >= obs.window_count) {
      throw EnvironmentError("driver reported an invalid window position");
    }
    if (response.contains("error") && response["error"].is_string()) obs.error = response["error"].get<std::string>();
    return obs;
  } catch (const json::exception& e) {
    throw EnvironmentError(std::string("malformed driver response: ") + e.what());
  }
}

std::string WireServer::handle(std::string_view request_line) {
  auto fail = [this](std::string message) {
    json j = last_ ? observation_to_wire(*last_) : json::object();
    j["error"] = std::move(message);
    return j.dump();
  };

  json request = json::parse(request_line, nullptr, /*allow_exceptions=*/false);
  if (request.is_discarded() || !request.is_object() || !request.contains("op") || !request["op"].is_string()) {
    return fail("malformed request");
  }
  const auto op = request["op"].get<std::string>();
  try {
    if (op == "reset") {
      last_ = env_->reset();
      return observation_to_wire(*last_).dump();
    }
    if (!last_) return fail("reset required before '" + op + "'");
    if (op == "step") {
      if (!request.contains("action") || !request["action"].is_string()) return fail("step requires an action");
      auto action = parse_action(request["action"].get<std::string>());
      if (!action) return fail("unparseable action: " + action.error().message);
      if (is_stop(*action)) return fail("stop is not an environment action");
      auto obs = env_->step(*action);
      last_ = obs;
      last_->error.reset();
      return observation_to_wire(obs).dump();
    }
    if (op == "rollback") {
      if (!request.contains("url") || !request["url"].is_string()) return fail("rollback requires a url");
      auto obs = env_->rollback(request["url"].get<std::string>());
      if (!obs) return fail(obs.error());
      last_ = *obs;
      return observation_to_wire(*obs).dump();
    }
  } catch (const std::exception& e) {
    return fail(std::string("driver failure: ") + e.what());
  }
  return fail("unknown op '" + op + "'");
}

void serve_wire(Environment& env, std::istream& in, std::ostream& out) {
  WireServer server(env);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << server.handle(line) << '\n' << std::flush;
  }
}

void LoopbackChannel::write_line(std::string_view line) { pending_.push_back(server_.handle(line)); }

std::optional<std::string> LoopbackChannel::read_line() {
  if (pending_.empty()) return std::nullopt;
  auto line = std::move(pending_.front());
  pending_.pop_front();
  return line;
}

ProcessChannel::ProcessChannel(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw EnvironmentError("pipe() failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw EnvironmentError("pipe() failed");
  }
  // A dead driver must surface as EPIPE rather than terminate the process.
  std::signal(SIGPIPE, SIG_IGN);
  pid_t pid = ::fork();
  if (pid < 0) throw EnvironmentError("fork() failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  pid_ = pid;
}

ProcessChannel::~ProcessChannel() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

void ProcessChannel::write_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  std::size_t written = 0;
  while (written < data.size()) {
    auto n = ::write(to_child_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw EnvironmentError(std::string("write to driver failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> ProcessChannel::read_line() {
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      auto line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    auto n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      if (buffer_.empty()) return std::nullopt;
      auto line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

json WireEnvironment::exchange(const json& request) {
  channel_->write_line(request.dump());
  auto line = channel_->read_line();
  if (!line) throw EnvironmentError("driver closed the connection");
  json response = json::parse(*line, nullptr, /*allow_exceptions=*/false);
  if (response.is_discarded() || !response.is_object()) throw EnvironmentError("driver sent a non-JSON response");
  return response;
}

Observation WireEnvironment::reset() {
  auto response = exchange({{"op", "reset"}});
  if (response.contains("error") && !response.contains("url")) {
    throw EnvironmentError("driver reset failed: " + response["error"].dump());
  }
  return observation_from_wire(response);
}

Observation WireEnvironment::step(const Action& action) {
  if (is_stop(action)) throw ContractViolation("stop must be handled by the caller before stepping");
  auto response = exchange({{"op", "step"}, {"action", serialize_action(action)}});
  if (!response.contains("url")) {
    throw EnvironmentError("driver step failed: " + response.value("error", std::string("no observation")));
  }
  return observation_from_wire(response);
}

Expected<Observation, std::string> WireEnvironment::rollback(const std::string& target_url) {
  auto response = exchange({{"op", "rollback"}, {"url", target_url}});
  if (response.contains("error")) {
    auto err = response["error"];
    return err.is_string() ? err.get<std::string>() : err.dump();
  }
  return observation_from_wire(response);
}

}  // namespace webnav
