#pragma once

// Guard prompt construction and verdict parsing.
//
// The classifier is prompted with a fixed template: a task sentence, the
// safety policy between category tags, the user message between
// conversation tags, and an output instruction. The model answers with
// "safe" or "unsafe" as its first token; everything after the stop
// marker is generation noise and is discarded.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/errors.hpp"

namespace sealgate {

inline constexpr std::string_view kCategoriesBegin =
    "<BEGIN UNSAFE CONTENT CATEGORIES>";
inline constexpr std::string_view kCategoriesEnd =
    "<END UNSAFE CONTENT CATEGORIES>";
inline constexpr std::string_view kConversationBegin = "<BEGIN CONVERSATION>";
inline constexpr std::string_view kConversationEnd = "<END CONVERSATION>";
inline constexpr std::string_view kStopMarker = "<|im_end|>";

inline constexpr std::string_view kTaskSentence =
    "Task: Check if there is unsafe content in 'User' messages in "
    "conversations according to our safety policy using the categories "
    "below.";

inline constexpr std::string_view kOutputInstruction =
    "Provide your safety assessment for the above conversation. Answer with "
    "'safe' or 'unsafe' only.";

// ---------------------------------------------------------------------------
// GuardPolicy: the ordered list of category descriptions rendered into
// the prompt. The built-in default covers all ten categories.

struct GuardPolicy {
  struct Entry {
    UnsafeCategory category;
    std::string description;

    bool operator==(const Entry&) const = default;
  };

  std::vector<Entry> entries;

  bool operator==(const GuardPolicy&) const = default;

  static GuardPolicy builtin_default() {
    GuardPolicy policy;
    policy.entries = {
        {UnsafeCategory::c1,
         "Content that encourages, plans, or provides instructions for "
         "violent crimes such as assault, murder, kidnapping, arson, or the "
         "creation and use of weapons."},
        {UnsafeCategory::c2,
         "Content that enables non-violent crimes such as fraud, theft, "
         "hacking, money laundering, drug trafficking, or the sale of "
         "illegal goods."},
        {UnsafeCategory::c3,
         "Content that sexualizes, exploits, or facilitates harm to "
         "children in any form."},
        {UnsafeCategory::c4,
         "Content that spreads verifiably false statements likely to damage "
         "a living person's reputation."},
        {UnsafeCategory::c5,
         "Content that offers tailored medical, legal, or financial advice "
         "whose reliance could cause serious harm."},
        {UnsafeCategory::c6,
         "Content that discloses or helps obtain private personal "
         "information such as addresses, identification numbers, or "
         "financial records."},
        {UnsafeCategory::c7,
         "Content that demeans, dehumanizes, or promotes hatred toward "
         "people based on protected attributes."},
        {UnsafeCategory::c8,
         "Content that encourages or provides methods for suicide, "
         "self-harm, or disordered eating."},
        {UnsafeCategory::c9,
         "Content that depicts explicit sexual acts or is intended for "
         "sexual arousal."},
        {UnsafeCategory::c10,
         "Content that promotes extremist ideologies, incites "
         "radicalization, or spreads demonstrably false information "
         "presented as fact."},
    };
    return policy;
  }

  // Loads a policy from a JSON file of the form
  //   {"C1": "description", ...}
  // Entries are rendered in C1..C10 order regardless of file order.
  static GuardPolicy load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw IoError("cannot open policy file '" + path.string() + "'");
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ConfigError("policy file '" + path.string() +
                        "' is not a JSON object");
    }
    GuardPolicy policy;
    for (UnsafeCategory cat : kAllCategories) {
      auto it = j.find(std::string(to_code(cat)));
      if (it == j.end()) continue;
      if (!it->is_string() || it->get<std::string>().empty()) {
        throw ConfigError("policy entry '" + std::string(to_code(cat)) +
                          "' in '" + path.string() +
                          "' must be a non-empty string");
      }
      policy.entries.push_back({cat, it->get<std::string>()});
    }
    if (policy.entries.empty()) {
      throw ConfigError("policy file '" + path.string() +
                        "' defines no categories");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!try_category(it.key())) {
        throw ConfigError("policy file '" + path.string() +
                          "' has unknown category key '" + it.key() + "'");
      }
    }
    return policy;
  }
};

// ---------------------------------------------------------------------------
// Prompt rendering. The output layout is stable byte for byte; tests pin
// it against a golden fixture.

inline std::string render_guard_prompt(const std::string& user_message,
                                       const GuardPolicy& policy) {
  if (user_message.empty()) {
    throw EmptyMessage("cannot render a guard prompt for an empty message");
  }
  if (policy.entries.empty()) {
    throw ConfigError("guard policy has no categories");
  }
  std::ostringstream out;
  out << kTaskSentence << "\n\n";
  out << kCategoriesBegin << '\n';
  for (const GuardPolicy::Entry& entry : policy.entries) {
    out << to_code(entry.category) << ": " << category_name(entry.category)
        << ".\n"
        << entry.description << '\n';
  }
  out << kCategoriesEnd << "\n\n";
  out << kConversationBegin << "\n\n";
  out << "User: " << user_message << "\n\n";
  out << kConversationEnd << "\n\n";
  out << kOutputInstruction << '\n';
  return out.str();
}

// Recovers the user message embedded by render_guard_prompt. Uses the
// first conversation opening and the last closing tag, so a message that
// itself contains conversation tags still round-trips.
inline std::string extract_conversation(const std::string& prompt) {
  const std::string open = std::string(kConversationBegin) + "\n\nUser: ";
  const std::string close = std::string(kConversationEnd);
  const std::size_t begin = prompt.find(open);
  if (begin == std::string::npos) {
    throw MalformedTemplate("prompt has no conversation opening tag");
  }
  const std::size_t payload_start = begin + open.size();
  const std::size_t end = prompt.rfind(close);
  if (end == std::string::npos || end < payload_start) {
    throw MalformedTemplate("prompt has no conversation closing tag");
  }
  // The renderer writes "\n\n" between the message and the closing tag.
  std::size_t payload_end = end;
  if (payload_end >= 2 && prompt.compare(payload_end - 2, 2, "\n\n") == 0) {
    payload_end -= 2;
  } else {
    throw MalformedTemplate("conversation closing tag is not preceded by a "
                            "blank line");
  }
  if (payload_end < payload_start) {
    throw MalformedTemplate("conversation block is empty");
  }
  return prompt.substr(payload_start, payload_end - payload_start);
}

// ---------------------------------------------------------------------------
// Verdict parsing: text after the first stop marker is dropped, then the
// first whitespace-delimited token decides, case-insensitively.

inline SafetyLabel parse_verdict(std::string_view completion) {
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
  const std::string token = detail::ascii_lower(text.substr(start, end - start));
  if (token == "safe") return SafetyLabel::safe;
  if (token == "unsafe") return SafetyLabel::unsafe;
  std::string shown(completion.substr(0, 64));
  throw UnparseableVerdict("completion does not start with a safe/unsafe "
                           "verdict: '" +
                           shown + "'");
}

}  // namespace sealgate
