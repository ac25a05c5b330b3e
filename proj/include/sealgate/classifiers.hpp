#pragma once

// Classifier contract plus the keyword baseline. The baseline exists so
// the full pipeline — benchmark build, evaluation, gateway — runs with
// zero model weights and zero network; it is deliberately weak, which
// is exactly what the multilingual-bypass demonstrations need.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/errors.hpp"

namespace sealgate {

// Implementations must be safe to share across threads: classify takes
// no observable mutable state and either returns a Verdict or throws a
// typed error — never a third state.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual Verdict classify(const std::string& prompt) const = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Lexicon: per-language unsafe term lists, loaded from JSON of the form
//   {"eng": ["bomb", ...], "tha": ["...", ...]}

struct Lexicon {
  std::map<Language, std::vector<std::string>> terms;

  static Lexicon load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw IoError("cannot open lexicon '" + path.string() + "'");
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ConfigError("lexicon '" + path.string() +
                        "' is not a JSON object");
    }
    Lexicon lexicon;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const Language lang = parse_language(it.key());
      if (!it->is_array()) {
        throw ConfigError("lexicon entry '" + it.key() + "' in '" +
                          path.string() + "' must be an array of strings");
      }
      std::vector<std::string> terms;
      for (const auto& term : *it) {
        if (!term.is_string() || term.get<std::string>().empty()) {
          throw ConfigError("lexicon entry '" + it.key() + "' in '" +
                            path.string() +
                            "' contains a non-string or empty term");
        }
        terms.push_back(detail::ascii_lower(term.get<std::string>()));
      }
      lexicon.terms[lang] = std::move(terms);
    }
    return lexicon;
  }
};

// Flags a prompt as unsafe iff any lexicon term occurs as a
// case-insensitive substring (ASCII folding; non-ASCII bytes compare
// verbatim). Deterministic, stateless.
class KeywordClassifier : public Classifier {
 public:
  explicit KeywordClassifier(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}

  Verdict classify(const std::string& prompt) const override {
    const auto start = std::chrono::steady_clock::now();
    const std::string haystack = detail::ascii_lower(prompt);
    Verdict verdict;
    verdict.backend_name = name();
    verdict.decision = SafetyLabel::safe;
    for (const auto& [lang, terms] : lexicon_.terms) {
      for (const std::string& term : terms) {
        if (haystack.find(term) != std::string::npos) {
          verdict.decision = SafetyLabel::unsafe;
          verdict.raw_evidence =
              std::string(to_code(lang)) + " term '" + term + "'";
          break;
        }
      }
      if (verdict.decision == SafetyLabel::unsafe) break;
    }
    verdict.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    return verdict;
  }

  std::string name() const override { return "keyword"; }

 private:
  Lexicon lexicon_;
};

}  // namespace sealgate
