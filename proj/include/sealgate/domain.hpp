#pragma once

// Shared vocabulary of the toolkit: prompt records, labels, languages,
// unsafe-content categories, jailbreak attack kinds, verdicts and
// confusion counts. All types are immutable values; validation happens
// once, at the edges, through validate_record().

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "sealgate/errors.hpp"

namespace sealgate {

// ---------------------------------------------------------------------------
// Languages: English plus the nine Southeast Asian benchmark languages.

enum class Language : std::uint8_t {
  eng,
  zho,
  ind,
  vie,
  tha,
  khm,
  lao,
  msa,
  mya,
  tgl,
};

inline constexpr std::array<Language, 10> kAllLanguages = {
    Language::eng, Language::zho, Language::ind, Language::vie, Language::tha,
    Language::khm, Language::lao, Language::msa, Language::mya, Language::tgl,
};

inline constexpr std::string_view to_code(Language lang) {
  switch (lang) {
    case Language::eng: return "eng";
    case Language::zho: return "zho";
    case Language::ind: return "ind";
    case Language::vie: return "vie";
    case Language::tha: return "tha";
    case Language::khm: return "khm";
    case Language::lao: return "lao";
    case Language::msa: return "msa";
    case Language::mya: return "mya";
    case Language::tgl: return "tgl";
  }
  return "eng";
}

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace detail

inline std::optional<Language> try_language(std::string_view code) {
  const std::string c = detail::ascii_lower(code);
  for (Language lang : kAllLanguages) {
    if (c == to_code(lang)) return lang;
  }
  return std::nullopt;
}

inline Language parse_language(std::string_view code,
                               std::string_view record_id = {}) {
  if (auto lang = try_language(code)) return *lang;
  std::string msg = "field 'language' has unknown code '" + std::string(code) + "'";
  if (!record_id.empty()) msg += " (record " + std::string(record_id) + ")";
  throw UnknownLanguage(msg);
}

// ---------------------------------------------------------------------------
// Unsafe-content categories C1..C10, a closed set with canonical names.

enum class UnsafeCategory : std::uint8_t { c1, c2, c3, c4, c5, c6, c7, c8, c9, c10 };

inline constexpr std::array<UnsafeCategory, 10> kAllCategories = {
    UnsafeCategory::c1, UnsafeCategory::c2, UnsafeCategory::c3,
    UnsafeCategory::c4, UnsafeCategory::c5, UnsafeCategory::c6,
    UnsafeCategory::c7, UnsafeCategory::c8, UnsafeCategory::c9,
    UnsafeCategory::c10,
};

inline constexpr std::string_view to_code(UnsafeCategory cat) {
  switch (cat) {
    case UnsafeCategory::c1: return "C1";
    case UnsafeCategory::c2: return "C2";
    case UnsafeCategory::c3: return "C3";
    case UnsafeCategory::c4: return "C4";
    case UnsafeCategory::c5: return "C5";
    case UnsafeCategory::c6: return "C6";
    case UnsafeCategory::c7: return "C7";
    case UnsafeCategory::c8: return "C8";
    case UnsafeCategory::c9: return "C9";
    case UnsafeCategory::c10: return "C10";
  }
  return "C1";
}

inline constexpr std::string_view category_name(UnsafeCategory cat) {
  switch (cat) {
    case UnsafeCategory::c1: return "Violent Criminal Activity";
    case UnsafeCategory::c2: return "Non-Violent Criminal Conduct";
    case UnsafeCategory::c3: return "Child Sexual Abuse";
    case UnsafeCategory::c4: return "False and Defamatory Claims";
    case UnsafeCategory::c5: return "Hazardous Professional Guidance";
    case UnsafeCategory::c6: return "Personal Information Exposure";
    case UnsafeCategory::c7: return "Discriminatory and Hateful Expression";
    case UnsafeCategory::c8: return "Self-Destructive Behavior Promotion";
    case UnsafeCategory::c9: return "Explicit Sexual Material";
    case UnsafeCategory::c10: return "Misinformation & Extremist Content";
  }
  return "";
}

inline std::optional<UnsafeCategory> try_category(std::string_view code) {
  std::string c = detail::ascii_lower(code);
  if (c.size() < 2 || c[0] != 'c') return std::nullopt;
  for (UnsafeCategory cat : kAllCategories) {
    if (c == detail::ascii_lower(to_code(cat))) return cat;
  }
  return std::nullopt;
}

inline UnsafeCategory parse_category(std::string_view code,
                                     std::string_view record_id = {}) {
  if (auto cat = try_category(code)) return *cat;
  std::string msg = "field 'category' has unknown code '" + std::string(code) + "'";
  if (!record_id.empty()) msg += " (record " + std::string(record_id) + ")";
  throw UnknownCategory(msg);
}

// ---------------------------------------------------------------------------
// Jailbreak attack kinds and their fixed family assignment.

enum class AttackKind : std::uint8_t {
  caesar,
  zulu,
  aim,
  dan,
  combination,
  self_cipher,
  deep_inception,
  dual_use,
  code_chameleon,
};

enum class AttackFamily : std::uint8_t { obfuscation, template_based, code };

inline constexpr std::array<AttackKind, 9> kAllAttacks = {
    AttackKind::caesar,         AttackKind::zulu,
    AttackKind::aim,            AttackKind::dan,
    AttackKind::combination,    AttackKind::self_cipher,
    AttackKind::deep_inception, AttackKind::dual_use,
    AttackKind::code_chameleon,
};

inline constexpr std::string_view to_code(AttackKind kind) {
  switch (kind) {
    case AttackKind::caesar: return "caesar";
    case AttackKind::zulu: return "zulu";
    case AttackKind::aim: return "aim";
    case AttackKind::dan: return "dan";
    case AttackKind::combination: return "combination";
    case AttackKind::self_cipher: return "self_cipher";
    case AttackKind::deep_inception: return "deep_inception";
    case AttackKind::dual_use: return "dual_use";
    case AttackKind::code_chameleon: return "code_chameleon";
  }
  return "caesar";
}

inline constexpr AttackFamily attack_family(AttackKind kind) {
  switch (kind) {
    case AttackKind::caesar:
    case AttackKind::zulu:
      return AttackFamily::obfuscation;
    case AttackKind::aim:
    case AttackKind::dan:
    case AttackKind::combination:
    case AttackKind::self_cipher:
    case AttackKind::deep_inception:
      return AttackFamily::template_based;
    case AttackKind::dual_use:
    case AttackKind::code_chameleon:
      return AttackFamily::code;
  }
  return AttackFamily::obfuscation;
}

inline constexpr std::string_view to_code(AttackFamily family) {
  switch (family) {
    case AttackFamily::obfuscation: return "obfuscation";
    case AttackFamily::template_based: return "template";
    case AttackFamily::code: return "code";
  }
  return "obfuscation";
}

inline std::optional<AttackKind> try_attack(std::string_view code) {
  const std::string c = detail::ascii_lower(code);
  for (AttackKind kind : kAllAttacks) {
    if (c == to_code(kind)) return kind;
  }
  return std::nullopt;
}

inline AttackKind parse_attack(std::string_view code,
                               std::string_view record_id = {}) {
  if (auto kind = try_attack(code)) return *kind;
  std::string msg = "field 'attack' has unknown code '" + std::string(code) + "'";
  if (!record_id.empty()) msg += " (record " + std::string(record_id) + ")";
  throw UnknownAttack(msg);
}

// ---------------------------------------------------------------------------
// Labels, sources, splits.

enum class SafetyLabel : std::uint8_t { safe, unsafe };

inline constexpr std::string_view to_code(SafetyLabel label) {
  return label == SafetyLabel::safe ? "safe" : "unsafe";
}

inline std::optional<SafetyLabel> try_label(std::string_view code) {
  const std::string c = detail::ascii_lower(code);
  if (c == "safe") return SafetyLabel::safe;
  if (c == "unsafe") return SafetyLabel::unsafe;
  return std::nullopt;
}

inline SafetyLabel parse_label(std::string_view code,
                               std::string_view record_id = {}) {
  if (auto label = try_label(code)) return *label;
  std::string msg = "field 'label' has unknown value '" + std::string(code) + "'";
  if (!record_id.empty()) msg += " (record " + std::string(record_id) + ")";
  throw UnknownLabel(msg);
}

enum class Source : std::uint8_t {
  beavertails,
  alpaca,
  do_not_answer,
  catqa,
  advbench,
  forbidden_questions,
};

inline constexpr std::array<Source, 6> kAllSources = {
    Source::beavertails, Source::alpaca,   Source::do_not_answer,
    Source::catqa,       Source::advbench, Source::forbidden_questions,
};

inline constexpr std::string_view to_code(Source source) {
  switch (source) {
    case Source::beavertails: return "beavertails";
    case Source::alpaca: return "alpaca";
    case Source::do_not_answer: return "do_not_answer";
    case Source::catqa: return "catqa";
    case Source::advbench: return "advbench";
    case Source::forbidden_questions: return "forbidden_questions";
  }
  return "alpaca";
}

inline std::optional<Source> try_source(std::string_view code) {
  const std::string c = detail::ascii_lower(code);
  for (Source source : kAllSources) {
    if (c == to_code(source)) return source;
  }
  return std::nullopt;
}

inline Source parse_source(std::string_view code,
                           std::string_view record_id = {}) {
  if (auto source = try_source(code)) return *source;
  std::string msg = "field 'source' has unknown value '" + std::string(code) + "'";
  if (!record_id.empty()) msg += " (record " + std::string(record_id) + ")";
  throw UnknownSource(msg);
}

enum class Split : std::uint8_t { train, valid, test };

inline constexpr std::array<Split, 3> kAllSplits = {Split::train, Split::valid,
                                                    Split::test};

inline constexpr std::string_view to_code(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "test";
}

inline std::optional<Split> try_split(std::string_view code) {
  const std::string c = detail::ascii_lower(code);
  for (Split split : kAllSplits) {
    if (c == to_code(split)) return split;
  }
  return std::nullopt;
}

inline Split parse_split(std::string_view code, std::string_view record_id = {}) {
  if (auto split = try_split(code)) return *split;
  std::string msg = "field 'split' has unknown value '" + std::string(code) + "'";
  if (!record_id.empty()) msg += " (record " + std::string(record_id) + ")";
  throw UnknownSplit(msg);
}

// ---------------------------------------------------------------------------
// PromptRecord: one benchmark prompt.
//
// parent_id names the English original a record descends from; English
// originals carry parent_id == id. All records of one parent share
// label, category, attack and split.

struct PromptRecord {
  std::string id;
  std::string parent_id;
  std::string text;
  Language language = Language::eng;
  SafetyLabel label = SafetyLabel::safe;
  std::optional<UnsafeCategory> category;
  std::optional<AttackKind> attack;
  Source source = Source::alpaca;
  std::optional<Split> split;

  bool operator==(const PromptRecord&) const = default;
};

using FieldMap = std::map<std::string, std::string>;

namespace detail {

inline bool is_absent(const FieldMap& raw, const char* key) {
  auto it = raw.find(key);
  return it == raw.end() || it->second.empty() || it->second == "null";
}

inline const std::string& fetch(const FieldMap& raw, const char* key,
                                const std::string& record_id) {
  auto it = raw.find(key);
  if (it == raw.end()) {
    throw MissingField("mandatory field '" + std::string(key) +
                       "' is missing (record " +
                       (record_id.empty() ? "?" : record_id) + ")");
  }
  return it->second;
}

}  // namespace detail

// Validates a raw field map into a PromptRecord, enforcing every record
// invariant. Language/category/attack/label codes are normalized to
// their canonical spelling.
inline PromptRecord validate_record(const FieldMap& raw) {
  std::string id;
  if (auto it = raw.find("id"); it != raw.end() && !it->second.empty()) {
    id = it->second;
  } else {
    throw MissingField("mandatory field 'id' is missing or empty");
  }

  PromptRecord rec;
  rec.id = id;
  rec.parent_id = detail::is_absent(raw, "parent_id") ? id : raw.at("parent_id");

  rec.text = detail::fetch(raw, "text", id);
  if (rec.text.empty()) {
    throw EmptyText("field 'text' is empty (record " + id + ")");
  }

  rec.language = parse_language(detail::fetch(raw, "language", id), id);
  rec.label = parse_label(detail::fetch(raw, "label", id), id);
  rec.source = parse_source(detail::fetch(raw, "source", id), id);

  if (!detail::is_absent(raw, "category")) {
    rec.category = parse_category(raw.at("category"), id);
  }
  if (!detail::is_absent(raw, "attack")) {
    rec.attack = parse_attack(raw.at("attack"), id);
  }
  if (!detail::is_absent(raw, "split")) {
    rec.split = parse_split(raw.at("split"), id);
  }

  if (rec.label == SafetyLabel::safe && rec.category.has_value()) {
    throw LabelContradiction("label 'safe' contradicts field 'category'='" +
                             std::string(to_code(*rec.category)) +
                             "' (record " + id + ")");
  }
  if (rec.label == SafetyLabel::safe && rec.attack.has_value()) {
    throw LabelContradiction("label 'safe' contradicts field 'attack'='" +
                             std::string(to_code(*rec.attack)) + "' (record " +
                             id + ")");
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Verdict: a binary safety decision plus the raw backend evidence.
// Backends never return a third state; failures surface as errors.

struct Verdict {
  SafetyLabel decision = SafetyLabel::safe;
  std::string backend_name;
  std::string raw_evidence;
  std::chrono::milliseconds latency{0};

  bool operator==(const Verdict&) const = default;
};

// ---------------------------------------------------------------------------
// ConfusionCounts with `unsafe` as the positive class.

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }

  ConfusionCounts& operator+=(const ConfusionCounts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    tn += other.tn;
    return *this;
  }

  friend ConfusionCounts operator+(ConfusionCounts lhs,
                                   const ConfusionCounts& rhs) {
    lhs += rhs;
    return lhs;
  }

  bool operator==(const ConfusionCounts&) const = default;
};

// Exactly one of the four counters increments.
inline ConfusionCounts confusion_update(ConfusionCounts counts,
                                        SafetyLabel gold,
                                        SafetyLabel predicted) {
  if (gold == SafetyLabel::unsafe) {
    predicted == SafetyLabel::unsafe ? ++counts.tp : ++counts.fn;
  } else {
    predicted == SafetyLabel::unsafe ? ++counts.fp : ++counts.tn;
  }
  return counts;
}

}  // namespace sealgate
