#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sealgate {

// Base of every typed error in the library. `code()` is a stable
// machine-readable name; it is what the CLI prints on stderr and what
// the gateway returns in error bodies.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define SEALGATE_ERROR(Name, code_string)            \
  struct Name : Error {                              \
    explicit Name(const std::string& message)        \
        : Error(code_string, message) {}             \
  }

// Record validation
SEALGATE_ERROR(UnknownLanguage, "unknown_language");
SEALGATE_ERROR(UnknownCategory, "unknown_category");
SEALGATE_ERROR(UnknownAttack, "unknown_attack");
SEALGATE_ERROR(UnknownLabel, "unknown_label");
SEALGATE_ERROR(UnknownSource, "unknown_source");
SEALGATE_ERROR(UnknownSplit, "unknown_split");
SEALGATE_ERROR(LabelContradiction, "label_contradiction");
SEALGATE_ERROR(EmptyText, "empty_text");
SEALGATE_ERROR(MissingField, "missing_field");

// Chat template
SEALGATE_ERROR(EmptyMessage, "empty_message");
SEALGATE_ERROR(UnparseableVerdict, "unparseable_verdict");

// Attacks
SEALGATE_ERROR(ShiftOutOfRange, "shift_out_of_range");
SEALGATE_ERROR(MissingTemplate, "missing_template");
SEALGATE_ERROR(MalformedTemplate, "malformed_template");
SEALGATE_ERROR(PayloadTooShort, "payload_too_short");
SEALGATE_ERROR(BadFragmentCount, "bad_fragment_count");
SEALGATE_ERROR(EmptyPayload, "empty_payload");
SEALGATE_ERROR(TranslationUnavailable, "translation_unavailable");

// Benchmark builder
SEALGATE_ERROR(MalformedLine, "malformed_line");
SEALGATE_ERROR(BadRatios, "bad_ratios");
SEALGATE_ERROR(ManifestMismatch, "manifest_mismatch");
SEALGATE_ERROR(InvalidCorpus, "invalid_corpus");

// Classifier backends
SEALGATE_ERROR(EndpointTimeout, "endpoint_timeout");
SEALGATE_ERROR(EndpointError, "endpoint_error");
SEALGATE_ERROR(MalformedResponse, "malformed_response");

// Evaluation
SEALGATE_ERROR(UndefinedMetric, "undefined_metric");
SEALGATE_ERROR(BackendMismatch, "backend_mismatch");
SEALGATE_ERROR(EmptyCorpus, "empty_corpus");

// Configuration and IO
SEALGATE_ERROR(ConfigError, "config_error");
SEALGATE_ERROR(IoError, "io_error");

#undef SEALGATE_ERROR

}  // namespace sealgate
