#pragma once

// Guardrail gateway: an HTTP service that classifies incoming prompts
// and either blocks them or forwards them to the configured upstream
// LLM endpoint.
//
// Endpoints:
//   POST /v1/guard   classify only, never forwards
//   POST /v1/chat    guard-then-proxy; unsafe ⇒ 403, upstream untouched
//   GET  /healthz    liveness
//   GET  /metrics    Prometheus-style counters and latency quantiles
//
// Hard guarantees, both property-tested:
//   zero-leak    an unsafe verdict sends zero bytes upstream
//   fail-closed  a backend failure blocks (unless fail_open is chosen)

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "sealgate/classifiers.hpp"
#include "sealgate/digest.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/endpoint_classifiers.hpp"
#include "sealgate/errors.hpp"

namespace sealgate {

enum class FailMode : std::uint8_t { fail_closed, fail_open };

struct UpstreamConfig {
  std::string host = "127.0.0.1";
  int port = 9000;
  std::string chat_path = "/v1/chat/completions";
};

struct GatewayConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  UpstreamConfig upstream;
  BackendConfig backend;
  FailMode fail_mode = FailMode::fail_closed;
  std::string block_message =
      "This request was blocked by the safety gateway.";
  std::chrono::milliseconds timeout{10000};  // upstream budget
  std::size_t max_body_bytes = 1048576;
  std::filesystem::path audit_log;  // empty ⇒ auditing disabled
  bool audit_raw = false;           // include raw prompts in the audit log
  bool classify_full_conversation = false;
};

inline GatewayConfig gateway_config_from_json(const nlohmann::json& j,
                                              const std::string& origin) {
  if (!j.is_object()) {
    throw ConfigError("gateway config " + origin + " is not a JSON object");
  }
  detail::reject_unknown_keys(
      j,
      {"listen", "upstream", "backend", "fail_mode", "block_message",
       "timeout_ms", "max_body_bytes", "audit_log", "audit_raw",
       "classify_full_conversation"},
      "");
  GatewayConfig config;
  if (j.contains("listen")) {
    const auto& l = j.at("listen");
    detail::reject_unknown_keys(l, {"host", "port"}, "listen.");
    detail::read_key(l, "host", config.listen_host, "listen.");
    detail::read_key(l, "port", config.listen_port, "listen.");
  }
  if (j.contains("upstream")) {
    const auto& u = j.at("upstream");
    detail::reject_unknown_keys(u, {"host", "port", "chat_path"}, "upstream.");
    detail::read_key(u, "host", config.upstream.host, "upstream.");
    detail::read_key(u, "port", config.upstream.port, "upstream.");
    detail::read_key(u, "chat_path", config.upstream.chat_path, "upstream.");
  }
  if (j.contains("backend")) {
    config.backend = backend_config_from_json(j.at("backend"), "backend.");
  }
  if (j.contains("fail_mode")) {
    std::string mode;
    detail::read_key(j, "fail_mode", mode, "");
    if (mode == "fail_closed") {
      config.fail_mode = FailMode::fail_closed;
    } else if (mode == "fail_open") {
      config.fail_mode = FailMode::fail_open;
    } else {
      throw ConfigError("config key 'fail_mode' must be fail_closed or "
                        "fail_open, got '" + mode + "'");
    }
  }
  detail::read_key(j, "block_message", config.block_message, "");
  if (config.block_message.empty()) {
    throw ConfigError("config key 'block_message' must be non-empty");
  }
  detail::read_ms(j, "timeout_ms", config.timeout, "");
  std::uint64_t max_body = config.max_body_bytes;
  detail::read_key(j, "max_body_bytes", max_body, "");
  if (max_body == 0) {
    throw ConfigError("config key 'max_body_bytes' must be positive");
  }
  config.max_body_bytes = max_body;
  std::string audit;
  detail::read_key(j, "audit_log", audit, "");
  config.audit_log = audit;
  detail::read_key(j, "audit_raw", config.audit_raw, "");
  detail::read_key(j, "classify_full_conversation",
                   config.classify_full_conversation, "");
  return config;
}

inline GatewayConfig load_gateway_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open gateway config '" + path.string() + "'");
  }
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    throw ConfigError("gateway config '" + path.string() +
                      "' is not valid JSON");
  }
  try {
    return gateway_config_from_json(j, "'" + path.string() + "'");
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + std::string(e.what()));
  }
}

// ---------------------------------------------------------------------------
// Audit records. One line per classified request, digests by default.

enum class GuardAction : std::uint8_t {
  blocked,
  forwarded,
  error_blocked,
  error_forwarded,
};

inline constexpr std::string_view to_code(GuardAction action) {
  switch (action) {
    case GuardAction::blocked: return "blocked";
    case GuardAction::forwarded: return "forwarded";
    case GuardAction::error_blocked: return "error_blocked";
    case GuardAction::error_forwarded: return "error_forwarded";
  }
  return "blocked";
}

struct GuardDecisionRecord {
  std::string request_id;
  std::string ts;
  std::string prompt_digest;
  std::string decision;  // safe | unsafe | unknown (fail-open error)
  std::string backend;
  std::int64_t latency_ms = 0;
  GuardAction action = GuardAction::blocked;
  std::string raw_prompt;  // populated only when audit_raw is on
};

// ---------------------------------------------------------------------------

class GatewayServer {
 public:
  GatewayServer(GatewayConfig config, std::shared_ptr<Classifier> classifier)
      : config_(std::move(config)), classifier_(std::move(classifier)) {
    if (!classifier_) {
      throw ConfigError("gateway requires a classifier backend");
    }
    if (!config_.audit_log.empty()) {
      audit_out_.open(config_.audit_log, std::ios::binary | std::ios::app);
      if (!audit_out_) {
        throw IoError("cannot open audit log '" + config_.audit_log.string() +
                      "' for appending");
      }
    }
    install_routes();
  }

  ~GatewayServer() { stop(); }

  // Binds and serves on a background thread; returns once the socket is
  // accepting. Port 0 picks an ephemeral port (see port()).
  bool start() {
    if (config_.listen_port == 0) {
      bound_port_ = server_.bind_to_any_port(config_.listen_host);
      if (bound_port_ < 0) return false;
    } else {
      if (!server_.bind_to_port(config_.listen_host, config_.listen_port)) {
        return false;
      }
      bound_port_ = config_.listen_port;
    }
    listener_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return true;
  }

  void stop() {
    if (listener_.joinable()) {
      server_.stop();
      listener_.join();
    }
  }

  int port() const { return bound_port_; }

  std::uint64_t requests_total() const { return requests_.load(); }
  std::uint64_t blocked_total() const { return blocked_.load(); }
  std::uint64_t forwarded_total() const { return forwarded_.load(); }
  std::uint64_t errors_total() const { return errors_.load(); }

 private:
  struct Outcome {
    std::string decision;
    GuardAction action;
    std::int64_t latency_ms = 0;
    std::optional<Verdict> verdict;
    std::string error_code;
  };

  void install_routes() {
    server_.set_payload_max_length(config_.max_body_bytes);

    server_.Get("/healthz", [this](const httplib::Request&,
                                   httplib::Response& res) {
      nlohmann::ordered_json body;
      body["status"] = "ok";
      body["backend"] = classifier_->name();
      res.set_content(body.dump(), "application/json");
    });

    server_.Get("/metrics", [this](const httplib::Request&,
                                   httplib::Response& res) {
      res.set_content(render_metrics(), "text/plain; version=0.0.4");
    });

    server_.Post("/v1/guard", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      handle_guard(req, res);
    });

    server_.Post("/v1/chat", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      handle_chat(req, res);
    });
  }

  static void reject(httplib::Response& res, int status,
                     const std::string& error, const std::string& message) {
    nlohmann::ordered_json body;
    body["error"] = error;
    body["message"] = message;
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  // Runs the classifier and folds failures into the configured fail
  // mode. Never returns a bare error to the caller of classify_prompt;
  // the outcome carries everything the handlers need.
  Outcome classify_prompt(const std::string& prompt) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      Verdict verdict = classifier_->classify(prompt);
      outcome.verdict = verdict;
      outcome.decision = std::string(to_code(verdict.decision));
      outcome.latency_ms = verdict.latency.count();
      outcome.action = verdict.decision == SafetyLabel::unsafe
                           ? GuardAction::blocked
                           : GuardAction::forwarded;
      return outcome;
    } catch (const Error& e) {
      outcome.error_code = e.code();
    } catch (const std::exception&) {
      outcome.error_code = "backend_failure";
    }
    outcome.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    if (config_.fail_mode == FailMode::fail_closed) {
      outcome.decision = "unsafe";
      outcome.action = GuardAction::error_blocked;
    } else {
      outcome.decision = "unknown";
      outcome.action = GuardAction::error_forwarded;
    }
    return outcome;
  }

  void handle_guard(const httplib::Request& req, httplib::Response& res) {
    std::string prompt;
    if (!parse_prompt_body(req.body, prompt)) {
      reject(res, 400, "bad_request",
             "body must be a JSON object with a non-empty 'prompt' string");
      return;
    }
    Outcome outcome = classify_prompt(prompt);
    finish(prompt, outcome);

    if (outcome.action == GuardAction::error_forwarded) {
      reject(res, 502, "backend_unavailable",
             "classifier failed (" + outcome.error_code +
                 ") and fail_open is configured");
      return;
    }
    nlohmann::ordered_json body;
    body["decision"] = outcome.decision;
    body["backend"] = classifier_->name();
    body["latency_ms"] = outcome.latency_ms;
    body["action"] = std::string(to_code(outcome.action));
    res.set_content(body.dump(), "application/json");
  }

  void handle_chat(const httplib::Request& req, httplib::Response& res) {
    std::string prompt;
    if (!parse_chat_body(req.body, prompt)) {
      reject(res, 400, "bad_request",
             "body must be a chat request with at least one user message");
      return;
    }
    Outcome outcome = classify_prompt(prompt);
    finish(prompt, outcome);

    if (outcome.action == GuardAction::blocked ||
        outcome.action == GuardAction::error_blocked) {
      nlohmann::ordered_json body;
      body["error"] = "blocked";
      body["message"] = config_.block_message;
      body["decision"] = outcome.decision;
      body["backend"] = classifier_->name();
      body["latency_ms"] = outcome.latency_ms;
      if (outcome.action == GuardAction::error_blocked) {
        body["detail"] = "backend failure (" + outcome.error_code +
                         "), blocked by fail_closed policy";
      }
      res.status = 403;
      res.set_content(body.dump(), "application/json");
      return;
    }

    // Safe (or fail-open error): forward the body unchanged.
    httplib::Client upstream(config_.upstream.host, config_.upstream.port);
    upstream.set_connection_timeout(config_.timeout);
    upstream.set_read_timeout(config_.timeout);
    upstream.set_write_timeout(config_.timeout);
    const std::string content_type =
        req.get_header_value("Content-Type").empty()
            ? "application/json"
            : req.get_header_value("Content-Type");
    auto up = upstream.Post(config_.upstream.chat_path, req.body, content_type);
    if (!up) {
      const httplib::Error err = up.error();
      if (err == httplib::Error::ConnectionTimeout ||
          err == httplib::Error::Read || err == httplib::Error::Write) {
        reject(res, 504, "upstream_timeout",
               "upstream did not answer within the configured timeout");
      } else {
        reject(res, 502, "upstream_unreachable",
               "upstream transport failure (" + httplib::to_string(err) + ")");
      }
      return;
    }
    res.status = up->status;
    res.set_content(up->body, up->get_header_value("Content-Type").empty()
                                  ? "application/json"
                                  : up->get_header_value("Content-Type"));
  }

  bool parse_prompt_body(const std::string& body, std::string& prompt) const {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("prompt") ||
        !j["prompt"].is_string()) {
      return false;
    }
    prompt = j["prompt"].get<std::string>();
    return !prompt.empty();
  }

  bool parse_chat_body(const std::string& body, std::string& prompt) const {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("messages") ||
        !j["messages"].is_array()) {
      return false;
    }
    std::vector<std::string> user_messages;
    for (const auto& message : j["messages"]) {
      if (message.is_object() && message.contains("role") &&
          message["role"] == "user" && message.contains("content") &&
          message["content"].is_string() &&
          !message["content"].get<std::string>().empty()) {
        user_messages.push_back(message["content"].get<std::string>());
      }
    }
    if (user_messages.empty()) return false;
    if (config_.classify_full_conversation) {
      std::ostringstream joined;
      for (std::size_t i = 0; i < user_messages.size(); ++i) {
        if (i > 0) joined << '\n';
        joined << user_messages[i];
      }
      prompt = joined.str();
    } else {
      prompt = user_messages.back();  // single-prompt scope by default
    }
    return true;
  }

  // Book-keeping common to both endpoints: metrics, then one audit line.
  void finish(const std::string& prompt, const Outcome& outcome) {
    requests_.fetch_add(1);
    switch (outcome.action) {
      case GuardAction::blocked:
        blocked_.fetch_add(1);
        break;
      case GuardAction::forwarded:
        forwarded_.fetch_add(1);
        break;
      case GuardAction::error_blocked:
        blocked_.fetch_add(1);
        errors_.fetch_add(1);
        break;
      case GuardAction::error_forwarded:
        forwarded_.fetch_add(1);
        errors_.fetch_add(1);
        break;
    }
    {
      std::scoped_lock lock(latency_mutex_);
      latencies_[latency_cursor_ % latencies_.size()] = outcome.latency_ms;
      ++latency_cursor_;
    }

    GuardDecisionRecord record;
    record.request_id = next_request_id();
    record.ts = now_utc();
    record.prompt_digest = digest_of(prompt);
    record.decision = outcome.decision;
    record.backend = classifier_->name();
    record.latency_ms = outcome.latency_ms;
    record.action = outcome.action;
    if (config_.audit_raw) record.raw_prompt = prompt;
    write_audit(record);
  }

  void write_audit(const GuardDecisionRecord& record) {
    if (!audit_out_.is_open()) return;
    nlohmann::ordered_json j;
    j["request_id"] = record.request_id;
    j["ts"] = record.ts;
    j["prompt_digest"] = record.prompt_digest;
    j["decision"] = record.decision;
    j["backend"] = record.backend;
    j["latency_ms"] = record.latency_ms;
    j["action"] = std::string(to_code(record.action));
    if (config_.audit_raw) j["prompt"] = record.raw_prompt;
    const std::string line = j.dump();
    std::scoped_lock lock(audit_mutex_);
    audit_out_ << line << '\n';
    audit_out_.flush();
  }

  std::string next_request_id() {
    std::ostringstream id;
    id << "sg-" << std::hex << start_epoch_ms_ << '-' << std::dec
       << request_counter_.fetch_add(1);
    return id.str();
  }

  static std::string now_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
  }

  std::string render_metrics() {
    std::vector<std::int64_t> sample;
    {
      std::scoped_lock lock(latency_mutex_);
      const std::size_t filled = std::min(latency_cursor_, latencies_.size());
      sample.assign(latencies_.begin(),
                    latencies_.begin() + static_cast<std::ptrdiff_t>(filled));
    }
    std::sort(sample.begin(), sample.end());
    const auto quantile = [&sample](double q) -> std::int64_t {
      if (sample.empty()) return 0;
      const auto index = static_cast<std::size_t>(
          q * static_cast<double>(sample.size() - 1) + 0.5);
      return sample[std::min(index, sample.size() - 1)];
    };
    std::ostringstream out;
    out << "# TYPE sealgate_requests_total counter\n"
        << "sealgate_requests_total " << requests_.load() << "\n"
        << "# TYPE sealgate_blocked_total counter\n"
        << "sealgate_blocked_total " << blocked_.load() << "\n"
        << "# TYPE sealgate_forwarded_total counter\n"
        << "sealgate_forwarded_total " << forwarded_.load() << "\n"
        << "# TYPE sealgate_errors_total counter\n"
        << "sealgate_errors_total " << errors_.load() << "\n"
        << "# TYPE sealgate_latency_ms summary\n"
        << "sealgate_latency_ms{quantile=\"0.5\"} " << quantile(0.5) << "\n"
        << "sealgate_latency_ms{quantile=\"0.99\"} " << quantile(0.99) << "\n";
    return out.str();
  }

  GatewayConfig config_;
  std::shared_ptr<Classifier> classifier_;
  httplib::Server server_;
  std::thread listener_;
  int bound_port_ = -1;

  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> blocked_{0};
  std::atomic<std::uint64_t> forwarded_{0};
  std::atomic<std::uint64_t> errors_{0};
  std::atomic<std::uint64_t> request_counter_{1};
  const std::uint64_t start_epoch_ms_ = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());

  std::mutex latency_mutex_;
  std::array<std::int64_t, 1024> latencies_{};
  std::size_t latency_cursor_ = 0;

  std::mutex audit_mutex_;
  std::ofstream audit_out_;
};

}  // namespace sealgate
