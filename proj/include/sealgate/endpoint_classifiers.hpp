#pragma once

// HTTP-backed classifier adapters.
//
// GenerationClassifier speaks to a completion endpoint: it renders the
// guard prompt, requests a greedy completion bounded by max_new_tokens
// and the stop marker, and reads the first token as the verdict.
// Temperature is part of the protocol (always 0) and deliberately has
// no config knob.
//
// ModerationClassifier speaks to a moderation endpoint returning a
// flagged boolean; category details ride along as raw evidence.
//
// Both adapters construct one HTTP client per call, so instances are
// freely shareable across threads with no per-call mutable state.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "sealgate/chat_template.hpp"
#include "sealgate/classifiers.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/errors.hpp"

namespace sealgate {

enum class CompletionDialect : std::uint8_t {
  simple,  // response {"text": "..."}
  openai,  // response {"choices": [{"text": "..."}]}
};

inline CompletionDialect parse_dialect(const std::string& name) {
  if (name == "simple") return CompletionDialect::simple;
  if (name == "openai") return CompletionDialect::openai;
  throw ConfigError("unknown completion dialect '" + name +
                    "' (expected simple or openai)");
}

struct GenerationEndpointConfig {
  std::string host = "127.0.0.1";
  int port = 8000;
  std::string path = "/v1/completions";
  std::string model = "guard";
  int max_new_tokens = 8;
  std::string stop = std::string(kStopMarker);
  std::chrono::milliseconds timeout{10000};
  std::string auth_env;  // env var holding a bearer token, optional
  CompletionDialect dialect = CompletionDialect::simple;
};

namespace detail {

inline void apply_auth(httplib::Client& client, const std::string& auth_env) {
  if (auth_env.empty()) return;
  if (const char* token = std::getenv(auth_env.c_str());
      token != nullptr && *token != '\0') {
    client.set_bearer_token_auth(token);
  }
}

inline void set_timeouts(httplib::Client& client,
                         std::chrono::milliseconds timeout) {
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
}

// Distinguishes "the endpoint did not answer in time" from every other
// transport failure; callers must never see a verdict on either.
[[noreturn]] inline void throw_transport(const std::string& what,
                                         httplib::Error error) {
  if (error == httplib::Error::ConnectionTimeout ||
      error == httplib::Error::Read || error == httplib::Error::Write) {
    throw EndpointTimeout(what + " timed out (" + httplib::to_string(error) +
                          ")");
  }
  throw EndpointError(what + " transport failure (" +
                      httplib::to_string(error) + ")");
}

inline std::string body_excerpt(const std::string& body) {
  constexpr std::size_t kMax = 160;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "…";
}

inline std::string first_token(std::string_view completion) {
  std::string_view text = completion;
  if (const std::size_t stop = text.find(kStopMarker);
      stop != std::string_view::npos) {
    text = text.substr(0, stop);
  }
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  std::size_t start = 0;
  while (start < text.size() && is_space(text[start])) ++start;
  std::size_t end = start;
  while (end < text.size() && !is_space(text[end])) ++end;
  return std::string(text.substr(start, end - start));
}

}  // namespace detail

class GenerationClassifier : public Classifier {
 public:
  GenerationClassifier(GenerationEndpointConfig config, GuardPolicy policy)
      : config_(std::move(config)), policy_(std::move(policy)) {}

  Verdict classify(const std::string& prompt) const override {
    const std::string guard_prompt = render_guard_prompt(prompt, policy_);

    nlohmann::json body;
    body["model"] = config_.model;
    body["prompt"] = guard_prompt;
    body["max_tokens"] = config_.max_new_tokens;
    body["temperature"] = 0;  // greedy decoding is part of the protocol
    body["stop"] = nlohmann::json::array({config_.stop});

    const auto start = std::chrono::steady_clock::now();
    httplib::Client client(config_.host, config_.port);
    detail::set_timeouts(client, config_.timeout);
    detail::apply_auth(client, config_.auth_env);
    auto res = client.Post(config_.path, body.dump(), "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (!res) {
      detail::throw_transport("completion request to " + config_.host + ":" +
                                  std::to_string(config_.port),
                              res.error());
    }
    if (res->status != 200) {
      throw EndpointError("completion endpoint returned status " +
                          std::to_string(res->status) + ": " +
                          detail::body_excerpt(res->body));
    }
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) {
      throw MalformedResponse("completion endpoint returned invalid JSON: " +
                              detail::body_excerpt(res->body));
    }
    std::string completion;
    if (config_.dialect == CompletionDialect::simple) {
      if (!reply.contains("text") || !reply["text"].is_string()) {
        throw MalformedResponse("completion response lacks a 'text' string");
      }
      completion = reply["text"].get<std::string>();
    } else {
      if (!reply.contains("choices") || !reply["choices"].is_array() ||
          reply["choices"].empty() || !reply["choices"][0].contains("text") ||
          !reply["choices"][0]["text"].is_string()) {
        throw MalformedResponse(
            "completion response lacks choices[0].text");
      }
      completion = reply["choices"][0]["text"].get<std::string>();
    }

    Verdict verdict;
    verdict.decision = parse_verdict(completion);
    verdict.backend_name = name();
    verdict.raw_evidence = detail::first_token(completion);
    verdict.latency = elapsed;
    return verdict;
  }

  std::string name() const override { return "generation"; }

  const GenerationEndpointConfig& config() const { return config_; }

 private:
  GenerationEndpointConfig config_;
  GuardPolicy policy_;
};

// ---------------------------------------------------------------------------

struct ModerationEndpointConfig {
  std::string host = "127.0.0.1";
  int port = 8001;
  std::string path = "/v1/moderations";
  std::chrono::milliseconds timeout{10000};
  std::string auth_env;
};

class ModerationClassifier : public Classifier {
 public:
  explicit ModerationClassifier(ModerationEndpointConfig config)
      : config_(std::move(config)) {}

  Verdict classify(const std::string& prompt) const override {
    nlohmann::json body;
    body["input"] = prompt;

    const auto start = std::chrono::steady_clock::now();
    httplib::Client client(config_.host, config_.port);
    detail::set_timeouts(client, config_.timeout);
    detail::apply_auth(client, config_.auth_env);
    auto res = client.Post(config_.path, body.dump(), "application/json");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (!res) {
      detail::throw_transport("moderation request to " + config_.host + ":" +
                                  std::to_string(config_.port),
                              res.error());
    }
    if (res->status != 200) {
      throw EndpointError("moderation endpoint returned status " +
                          std::to_string(res->status) + ": " +
                          detail::body_excerpt(res->body));
    }
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) {
      throw MalformedResponse("moderation endpoint returned invalid JSON: " +
                              detail::body_excerpt(res->body));
    }
    if (!reply.contains("flagged") || !reply["flagged"].is_boolean()) {
      throw MalformedResponse("moderation response lacks a 'flagged' boolean");
    }

    Verdict verdict;
    verdict.decision = reply["flagged"].get<bool>() ? SafetyLabel::unsafe
                                                    : SafetyLabel::safe;
    verdict.backend_name = name();
    if (reply.contains("categories")) {
      verdict.raw_evidence = reply["categories"].dump();
    }
    verdict.latency = elapsed;
    return verdict;
  }

  std::string name() const override { return "moderation"; }

 private:
  ModerationEndpointConfig config_;
};

// ---------------------------------------------------------------------------
// Backend selection shared by the CLI and the gateway. Parsed strictly:
// unknown keys are configuration mistakes, not extension points.

struct BackendConfig {
  std::string kind = "keyword";  // keyword | generation | moderation
  std::filesystem::path lexicon_path;
  std::filesystem::path policy_path;  // empty ⇒ built-in default policy
  GenerationEndpointConfig generation;
  ModerationEndpointConfig moderation;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                std::initializer_list<const char*> known,
                                const std::string& prefix) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (const char* key : known) {
      if (it.key() == key) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw ConfigError("unknown config key '" + prefix + it.key() + "'");
    }
  }
}

template <typename T>
inline void read_key(const nlohmann::json& j, const char* key, T& out,
                     const std::string& prefix) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + prefix + key + "' has the wrong type");
  }
}

inline void read_ms(const nlohmann::json& j, const char* key,
                    std::chrono::milliseconds& out, const std::string& prefix) {
  std::int64_t value = out.count();
  read_key(j, key, value, prefix);
  if (value <= 0) {
    throw ConfigError("config key '" + prefix + key + "' must be positive");
  }
  out = std::chrono::milliseconds(value);
}

}  // namespace detail

inline BackendConfig backend_config_from_json(const nlohmann::json& j,
                                              const std::string& prefix) {
  if (!j.is_object()) {
    throw ConfigError("config key '" + prefix + "' must be an object");
  }
  detail::reject_unknown_keys(
      j, {"kind", "lexicon", "policy", "generation", "moderation"}, prefix);
  BackendConfig config;
  detail::read_key(j, "kind", config.kind, prefix);
  if (config.kind != "keyword" && config.kind != "generation" &&
      config.kind != "moderation") {
    throw ConfigError("config key '" + prefix + "kind' must be keyword, "
                      "generation or moderation, got '" + config.kind + "'");
  }
  std::string lexicon;
  detail::read_key(j, "lexicon", lexicon, prefix);
  config.lexicon_path = lexicon;
  std::string policy;
  detail::read_key(j, "policy", policy, prefix);
  config.policy_path = policy;

  if (j.contains("generation")) {
    const auto& g = j.at("generation");
    const std::string gp = prefix + "generation.";
    detail::reject_unknown_keys(g,
                                {"host", "port", "path", "model",
                                 "max_new_tokens", "stop", "timeout_ms",
                                 "auth_env", "dialect"},
                                gp);
    detail::read_key(g, "host", config.generation.host, gp);
    detail::read_key(g, "port", config.generation.port, gp);
    detail::read_key(g, "path", config.generation.path, gp);
    detail::read_key(g, "model", config.generation.model, gp);
    detail::read_key(g, "max_new_tokens", config.generation.max_new_tokens, gp);
    detail::read_key(g, "stop", config.generation.stop, gp);
    detail::read_ms(g, "timeout_ms", config.generation.timeout, gp);
    detail::read_key(g, "auth_env", config.generation.auth_env, gp);
    std::string dialect = "simple";
    detail::read_key(g, "dialect", dialect, gp);
    config.generation.dialect = parse_dialect(dialect);
  }
  if (j.contains("moderation")) {
    const auto& m = j.at("moderation");
    const std::string mp = prefix + "moderation.";
    detail::reject_unknown_keys(
        m, {"host", "port", "path", "timeout_ms", "auth_env"}, mp);
    detail::read_key(m, "host", config.moderation.host, mp);
    detail::read_key(m, "port", config.moderation.port, mp);
    detail::read_key(m, "path", config.moderation.path, mp);
    detail::read_ms(m, "timeout_ms", config.moderation.timeout, mp);
    detail::read_key(m, "auth_env", config.moderation.auth_env, mp);
  }
  return config;
}

inline std::unique_ptr<Classifier> make_classifier(const BackendConfig& config) {
  if (config.kind == "keyword") {
    if (config.lexicon_path.empty()) {
      throw ConfigError("keyword backend requires a lexicon path");
    }
    return std::make_unique<KeywordClassifier>(
        Lexicon::load(config.lexicon_path));
  }
  if (config.kind == "generation") {
    GuardPolicy policy = config.policy_path.empty()
                             ? GuardPolicy::builtin_default()
                             : GuardPolicy::load(config.policy_path);
    return std::make_unique<GenerationClassifier>(config.generation,
                                                  std::move(policy));
  }
  if (config.kind == "moderation") {
    return std::make_unique<ModerationClassifier>(config.moderation);
  }
  throw ConfigError("unknown backend kind '" + config.kind + "'");
}

}  // namespace sealgate
