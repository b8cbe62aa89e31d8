#pragma once

#include <deque>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "webnav/environment.hpp"

namespace webnav {

// Line-delimited JSON driver protocol.
//   request:  {"op": "reset" | "step" | "rollback", "action"?: "<action>", "url"?: "<url>"}
//   response: {"url", "axtree", "window_offset", "window_count", "error"?}

class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(std::string_view line) = 0;
  // nullopt on end of stream.
  virtual std::optional<std::string> read_line() = 0;
};

// Talks to a driver subprocess over its stdin/stdout (POSIX only).
class ProcessChannel final : public LineChannel {
 public:
  explicit ProcessChannel(const std::string& command);
  ~ProcessChannel() override;
  ProcessChannel(const ProcessChannel&) = delete;
  ProcessChannel& operator=(const ProcessChannel&) = delete;

  void write_line(std::string_view line) override;
  std::optional<std::string> read_line() override;

 private:
  int to_child_ = -1;
  int from_child_ = -1;
  int pid_ = -1;
  std::string buffer_;
};

// Driver side: one request line in, one response line out. Keeps the last
// observation so failed requests can echo the unchanged page.
class WireServer {
 public:
  explicit WireServer(Environment& env) : env_(&env) {}
  std::string handle(std::string_view request_line);

 private:
  Environment* env_;
  std::optional<Observation> last_;
};

// Serves requests synchronously against an in-process environment.
class LoopbackChannel final : public LineChannel {
 public:
  explicit LoopbackChannel(std::shared_ptr<Environment> env) : env_(std::move(env)), server_(*env_) {}
  void write_line(std::string_view line) override;
  std::optional<std::string> read_line() override;

 private:
  std::shared_ptr<Environment> env_;
  WireServer server_;
  std::deque<std::string> pending_;
};

// Environment adapter for a live browser driver speaking the wire protocol.
class WireEnvironment final : public Environment {
 public:
  explicit WireEnvironment(std::unique_ptr<LineChannel> channel) : channel_(std::move(channel)) {}

  Observation reset() override;
  Observation step(const Action& action) override;
  Expected<Observation, std::string> rollback(const std::string& target_url) override;

 private:
  nlohmann::json exchange(const nlohmann::json& request);
  std::unique_ptr<LineChannel> channel_;
};

nlohmann::json observation_to_wire(const Observation& obs);
// Throws EnvironmentError on a malformed response.
Observation observation_from_wire(const nlohmann::json& response);

// Serves until end of input. Used by the bundled simulated driver.
void serve_wire(Environment& env, std::istream& in, std::ostream& out);

}  // namespace webnav
