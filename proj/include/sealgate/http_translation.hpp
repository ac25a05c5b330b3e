#pragma once

// HTTP-backed TranslationClient with client-side rate limiting and
// exponential-backoff retries. Desk-scale tests never use this class;
// they run against the deterministic mock. The wire dialect is a plain
// JSON POST:
//   request  {"q": "<text>", "target": "<code>"}
//   response {"translatedText": "<text>"}

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "sealgate/errors.hpp"
#include "sealgate/translation.hpp"

namespace sealgate {

struct HttpTranslationConfig {
  std::string host = "127.0.0.1";
  int port = 8090;
  std::string path = "/translate";
  int max_retries = 3;                        // attempts beyond the first
  std::chrono::milliseconds backoff_base{200};  // doubles per retry
  std::chrono::milliseconds min_interval{0};    // client-side rate limit
  std::chrono::milliseconds timeout{10000};
};

class HttpTranslationClient : public TranslationClient {
 public:
  explicit HttpTranslationClient(HttpTranslationConfig config)
      : config_(std::move(config)) {}

  std::string translate(const std::string& text,
                        const std::string& target_code) override {
    nlohmann::json body;
    body["q"] = text;
    body["target"] = target_code;
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 1)));
      }
      throttle();
      httplib::Client client(config_.host, config_.port);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
          config_.timeout));
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(
          config_.timeout));
      auto res = client.Post(config_.path, payload, "application/json");
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "status " + std::to_string(res->status);
        continue;  // retryable
      }
      if (res->status != 200) {
        throw TranslationUnavailable(
            "translation endpoint rejected request for '" + target_code +
            "' with status " + std::to_string(res->status));
      }
      nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
      if (reply.is_discarded() || !reply.contains("translatedText") ||
          !reply["translatedText"].is_string()) {
        throw TranslationUnavailable(
            "translation endpoint returned a malformed body for '" +
            target_code + "'");
      }
      return reply["translatedText"].get<std::string>();
    }
    throw TranslationUnavailable("translation to '" + target_code +
                                 "' failed after " +
                                 std::to_string(config_.max_retries + 1) +
                                 " attempts (" + last_error + ")");
  }

 private:
  // Enforces a minimum spacing between outbound requests across threads.
  void throttle() {
    if (config_.min_interval.count() <= 0) return;
    std::unique_lock lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    const auto earliest = last_request_ + config_.min_interval;
    if (now < earliest) {
      std::this_thread::sleep_for(earliest - now);
      last_request_ = earliest;
    } else {
      last_request_ = now;
    }
  }

  HttpTranslationConfig config_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point last_request_{};
};

}  // namespace sealgate
