#include "webnav/http_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "webnav/errors.hpp"

namespace webnav {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::delay_for(int retry) const {
  auto delay = base_delay;
  for (int i = 1; i < retry && delay < max_delay; ++i) delay *= 2;
  return std::min(delay, max_delay);
}

TokenBucket::TokenBucket(double rate_per_second, double burst, Clock clock, Sleep sleep)
    : rate_(rate_per_second),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      sleep_(sleep ? std::move(sleep) : Sleep([](auto d) { std::this_thread::sleep_for(d); })),
      last_(clock_()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  std::lock_guard lock(mutex_);
  while (true) {
    auto now = clock_();
    double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    sleep_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(wait) + std::chrono::microseconds(1));
  }
}

HttpBackendConfig HttpBackendConfig::from_env() {
  HttpBackendConfig config;
  auto get = [](const char* name) -> std::string {
    const char* v = std::getenv(name);
    return v ? v : "";
  };
  config.endpoint = get("WEBNAV_ENDPOINT");
  config.api_key = get("WEBNAV_API_KEY");
  config.model_id = get("WEBNAV_MODEL");
  if (get("WEBNAV_PROFILE") == "completion") config.profile = WireProfile::kCompletion;
  return config;
}

void HttpBackendConfig::merge_json(const json& j) {
  try {
    if (j.contains("endpoint")) endpoint = j["endpoint"].get<std::string>();
    if (j.contains("api_key")) api_key = j["api_key"].get<std::string>();
    if (j.contains("model_id")) model_id = j["model_id"].get<std::string>();
    if (j.contains("profile")) {
      auto p = j["profile"].get<std::string>();
      if (p == "chat") profile = WireProfile::kChat;
      else if (p == "completion") profile = WireProfile::kCompletion;
      else throw ConfigError("unknown backend profile '" + p + "'");
    }
    if (j.contains("max_attempts")) retry.max_attempts = j["max_attempts"].get<int>();
    if (j.contains("base_delay_ms")) retry.base_delay = std::chrono::milliseconds(j["base_delay_ms"].get<int>());
    if (j.contains("max_delay_ms")) retry.max_delay = std::chrono::milliseconds(j["max_delay_ms"].get<int>());
    if (j.contains("requests_per_second")) requests_per_second = j["requests_per_second"].get<double>();
    if (j.contains("burst")) burst = j["burst"].get<double>();
    if (j.contains("timeout_s")) timeout = std::chrono::seconds(j["timeout_s"].get<int>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed backend config: ") + e.what());
  }
  if (retry.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
}

json build_request_body(const HttpBackendConfig& config, const ChatRequest& request) {
  json body;
  body["model"] = request.model_id.empty() ? config.model_id : request.model_id;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  if (config.profile == WireProfile::kChat) {
    body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
  } else {
    body["prompt"] = request.prompt;
  }
  return body;
}

std::string extract_completion_text(WireProfile profile, const std::string& body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw BackendError(BackendError::Kind::kProtocol, "endpoint returned non-JSON body");
  try {
    const auto& choice = doc.at("choices").at(0);
    if (profile == WireProfile::kChat) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(BackendError::Kind::kProtocol, std::string("unexpected completion schema: ") + e.what());
  }
}

namespace {

bool is_transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

HttpBackend::HttpBackend(HttpBackendConfig config, Sleep retry_sleep)
    : config_(std::move(config)),
      retry_sleep_(retry_sleep ? std::move(retry_sleep) : Sleep([](auto d) { std::this_thread::sleep_for(d); })),
      bucket_(config_.requests_per_second, config_.burst) {
  auto scheme = config_.endpoint.find("://");
  if (config_.endpoint.empty() || scheme == std::string::npos) {
    throw ConfigError("backend endpoint must be an absolute http(s) URL");
  }
  auto slash = config_.endpoint.find('/', scheme + 3);
  scheme_host_port_ = config_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (config_.endpoint.rfind("https://", 0) == 0) throw ConfigError("this build has no TLS support");
#endif
}

int HttpBackend::attempts_made() const {
  std::lock_guard lock(stats_mutex_);
  return attempts_;
}

std::string HttpBackend::complete(const ChatRequest& request) {
  const std::string payload = build_request_body(config_, request).dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) retry_sleep_(config_.retry.delay_for(attempt - 1));
    bucket_.acquire();
    {
      std::lock_guard lock(stats_mutex_);
      ++attempts_;
    }
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto result = client.Post(path_, headers, payload, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 200 && result->status < 300) {
      return extract_completion_text(config_.profile, result->body);
    }
    last_error = "HTTP " + std::to_string(result->status);
    if (!is_transient(result->status)) {
      throw BackendError(BackendError::Kind::kProtocol, "endpoint rejected request: " + last_error);
    }
  }
  throw BackendError(BackendError::Kind::kUnavailable,
                     "gave up after " + std::to_string(config_.retry.max_attempts) + " attempts (" + last_error + ")");
}

}  // namespace webnav
