#pragma once

#include <stdexcept>
#include <string>

namespace webnav {

// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IndexError : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

class InvalidTargetError : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

// Malformed site graph, task file, playbook or config document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The environment could not serve a request (driver crashed, broken pipe).
class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendError : public std::runtime_error {
 public:
  enum class Kind { kUnavailable, kProtocol, kNoMatch };

  BackendError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace webnav
