#pragma once

#include <chrono>
#include <functional>
#include <mutex>
#include <string>

#include "webnav/backend.hpp"

namespace webnav {

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};

  // Delay before retry number `retry` (1-based): base * 2^(retry-1), capped.
  std::chrono::milliseconds delay_for(int retry) const;
};

// Classic token bucket. Clock and sleep are injectable so tests can run on a
// virtual timeline.
class TokenBucket {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;
  using Sleep = std::function<void(std::chrono::steady_clock::duration)>;

  // rate <= 0 disables limiting.
  TokenBucket(double rate_per_second, double burst, Clock clock = {}, Sleep sleep = {});

  // Blocks until a token is available, then consumes it.
  void acquire();

 private:
  double rate_;
  double burst_;
  double tokens_;
  Clock clock_;
  Sleep sleep_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

enum class WireProfile { kChat, kCompletion };

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string api_key;
  std::string model_id;
  WireProfile profile = WireProfile::kChat;
  RetryPolicy retry;
  double requests_per_second = 0.0;
  double burst = 1.0;
  std::chrono::seconds timeout{120};

  // WEBNAV_ENDPOINT, WEBNAV_API_KEY, WEBNAV_MODEL, WEBNAV_PROFILE.
  static HttpBackendConfig from_env();
  // Keys: endpoint, api_key, model_id, profile, max_attempts, base_delay_ms,
  // max_delay_ms, requests_per_second, burst, timeout_s. Missing keys keep the
  // current value.
  void merge_json(const nlohmann::json& j);
};

nlohmann::json build_request_body(const HttpBackendConfig& config, const ChatRequest& request);
// Throws BackendError(kProtocol).
std::string extract_completion_text(WireProfile profile, const std::string& body);

class HttpBackend final : public Backend {
 public:
  using Sleep = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleep retry_sleep = {});
  std::string complete(const ChatRequest& request) override;

  int attempts_made() const;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  Sleep retry_sleep_;
  TokenBucket bucket_;
  mutable std::mutex stats_mutex_;
  int attempts_ = 0;
};

}  // namespace webnav
