#pragma once

// Translation client interface. The benchmark builder and the zulu
// attack both talk to a TranslationClient; production deployments plug
// in an HTTP-backed client, tests use the deterministic mock.

#include <atomic>
#include <cstdint>
#include <string>

#include "sealgate/errors.hpp"

namespace sealgate {

class TranslationClient {
 public:
  virtual ~TranslationClient() = default;

  // Translates text into the language named by an ISO 639-3 code.
  // Throws TranslationUnavailable when the target cannot be served.
  virtual std::string translate(const std::string& text,
                                const std::string& target_code) = 0;
};

// Deterministic stand-in: tags the text with the target code instead of
// translating. Lets the pipeline and its tests run with no network while
// keeping outputs distinguishable per language.
class MockTranslationClient : public TranslationClient {
 public:
  std::string translate(const std::string& text,
                        const std::string& target_code) override {
    if (target_code.empty()) {
      throw TranslationUnavailable("empty translation target code");
    }
    return target_code + ":" + text;
  }
};

// Mock that fails for one configured target; exercises the strict abort
// path of the corpus expansion.
class FailingTranslationClient : public TranslationClient {
 public:
  explicit FailingTranslationClient(std::string failing_code)
      : failing_code_(std::move(failing_code)) {}

  std::string translate(const std::string& text,
                        const std::string& target_code) override {
    if (target_code == failing_code_) {
      throw TranslationUnavailable("no translation route to '" + target_code +
                                   "'");
    }
    return target_code + ":" + text;
  }

 private:
  std::string failing_code_;
};

// Decorator that counts calls made through it; used to assert how many
// translations a pipeline stage issued.
class RecordingTranslationClient : public TranslationClient {
 public:
  explicit RecordingTranslationClient(TranslationClient& inner)
      : inner_(inner) {}

  std::string translate(const std::string& text,
                        const std::string& target_code) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.translate(text, target_code);
  }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  TranslationClient& inner_;
  std::atomic<std::uint64_t> calls_{0};
};

}  // namespace sealgate
