#pragma once

// Shared test utilities: scratch directories, seeded string generators,
// scripted classifiers and in-process mock servers.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "sealgate/classifiers.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/errors.hpp"

namespace testutil {

inline std::filesystem::path fixtures_dir() {
  return std::filesystem::path(SEALGATE_FIXTURES_DIR);
}

inline std::filesystem::path templates_dir() {
  return std::filesystem::path(SEALGATE_TEMPLATES_DIR);
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("sealgate-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// Seeded generators.

// Mixed-alphabet strings: ASCII, whitespace and multi-byte UTF-8.
inline std::string random_unicode_string(std::mt19937_64& rng,
                                         std::size_t min_len = 0,
                                         std::size_t max_len = 64) {
  static const std::vector<std::string> pool = {
      "a", "b", "z", "A", "Q", "Z", "0", "9", " ", "\t", "\n", ".", ",",
      "?", "!", "'", "\"", "\\", "{", "}", "é", "ß", "中", "文", "ก", "ข",
      "α", "β", "😀", "🚀", "–", "…"};
  std::uniform_int_distribution<std::size_t> len_dist(min_len, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  const std::size_t len = len_dist(rng);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) out += pool[pick(rng)];
  return out;
}

// Payloads guaranteed distinctive (no accidental substring collisions
// with template prose).
inline std::string distinctive_payload(std::mt19937_64& rng) {
  static const char alphabet[] =
      "abcdefghijklmnopqrstuvwxyz0123456789";
  std::uniform_int_distribution<std::size_t> pick(0, sizeof(alphabet) - 2);
  std::string out = "pay-";
  for (int i = 0; i < 24; ++i) out += alphabet[pick(rng)];
  return out;
}

// ---------------------------------------------------------------------------
// Classifier doubles.

// Flags prompts containing any needle; optionally throws on a trigger.
class ScriptedClassifier : public sealgate::Classifier {
 public:
  explicit ScriptedClassifier(std::vector<std::string> unsafe_needles,
                              std::string throw_trigger = {})
      : needles_(std::move(unsafe_needles)),
        throw_trigger_(std::move(throw_trigger)) {}

  sealgate::Verdict classify(const std::string& prompt) const override {
    calls_.fetch_add(1);
    if (!throw_trigger_.empty() &&
        prompt.find(throw_trigger_) != std::string::npos) {
      throw sealgate::EndpointError("scripted backend failure");
    }
    sealgate::Verdict verdict;
    verdict.backend_name = name();
    verdict.decision = sealgate::SafetyLabel::safe;
    for (const std::string& needle : needles_) {
      if (prompt.find(needle) != std::string::npos) {
        verdict.decision = sealgate::SafetyLabel::unsafe;
        break;
      }
    }
    return verdict;
  }

  std::string name() const override { return "scripted"; }

  std::uint64_t calls() const { return calls_.load(); }

 private:
  std::vector<std::string> needles_;
  std::string throw_trigger_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

// Always throws; for fail-mode testing.
class FailingClassifier : public sealgate::Classifier {
 public:
  sealgate::Verdict classify(const std::string&) const override {
    throw sealgate::EndpointTimeout("injected backend outage");
  }
  std::string name() const override { return "failing"; }
};

// ---------------------------------------------------------------------------
// In-process HTTP server wrapper bound to an ephemeral port.

class MockServer {
 public:
  MockServer() = default;
  ~MockServer() { stop(); }

  httplib::Server& server() { return server_; }

  int start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

// Records every request body it sees; replies with a fixed payload.
class RecordingUpstream {
 public:
  explicit RecordingUpstream(std::string reply_body =
                                 R"({"id":"cmpl-1","output":"hello"})")
      : reply_body_(std::move(reply_body)) {
    server_.server().Post("/v1/chat/completions",
                          [this](const httplib::Request& req,
                                 httplib::Response& res) {
                            {
                              std::scoped_lock lock(mutex_);
                              bodies_.push_back(req.body);
                            }
                            res.set_content(reply_body_, "application/json");
                          });
  }

  int start() { return server_.start(); }
  void stop() { server_.stop(); }
  int port() const { return server_.port(); }

  std::vector<std::string> bodies() const {
    std::scoped_lock lock(mutex_);
    return bodies_;
  }

  std::size_t request_count() const {
    std::scoped_lock lock(mutex_);
    return bodies_.size();
  }

  const std::string& reply_body() const { return reply_body_; }

 private:
  MockServer server_;
  mutable std::mutex mutex_;
  std::vector<std::string> bodies_;
  std::string reply_body_;
};

}  // namespace testutil
