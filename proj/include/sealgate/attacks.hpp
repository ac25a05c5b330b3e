#pragma once

// The nine jailbreak transformations. Every attack wraps an unsafe
// payload into a prompt engineered to slip past a safety classifier:
//
//   obfuscation  caesar, zulu          encoded / translated payload
//   template     aim, dan, combination, self_cipher, deep_inception
//   code         dual_use, code_chameleon
//
// Prompt prose lives in a templates/ directory (one UTF-8 file per
// kind, single {PAYLOAD} placeholder, optional `pretransform:` front
// matter) so the wording stays auditable and swappable without code
// changes. All transformations are deterministic given an AttackContext.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sealgate/digest.hpp"
#include "sealgate/domain.hpp"
#include "sealgate/errors.hpp"
#include "sealgate/translation.hpp"

namespace sealgate {

struct AttackContext {
  std::filesystem::path templates_dir;
  int shift = 3;                  // caesar rotation, 0..25
  int fragment_count = 3;         // dual_use pieces, >= 2
  TranslationClient* translator = nullptr;  // required by zulu
  std::uint64_t rng_seed = 0;
  std::string zulu_target = "zul";
};

struct AttackedPrompt {
  std::string text;
  AttackKind kind = AttackKind::caesar;
  std::string payload_id;

  bool operator==(const AttackedPrompt&) const = default;
};

// ---------------------------------------------------------------------------
// Caesar rotation over ASCII letters; every other byte passes through.

inline void check_shift(int shift) {
  if (shift < 0 || shift > 25) {
    throw ShiftOutOfRange("caesar shift must be in 0..25, got " +
                          std::to_string(shift));
  }
}

inline std::string caesar_encode(std::string_view text, int shift) {
  check_shift(shift);
  std::string out(text);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') {
      c = static_cast<char>('a' + (c - 'a' + shift) % 26);
    } else if (c >= 'A' && c <= 'Z') {
      c = static_cast<char>('A' + (c - 'A' + shift) % 26);
    }
  }
  return out;
}

inline std::string caesar_decode(std::string_view text, int shift) {
  check_shift(shift);
  return caesar_encode(text, (26 - shift) % 26);
}

// ---------------------------------------------------------------------------
// Template loading. A template is the prompt body with one {PAYLOAD}
// placeholder, optionally preceded by a front-matter line
// `pretransform: caesar|none` naming a payload pre-transformation.

enum class Pretransform : std::uint8_t { none, caesar };

struct AttackTemplate {
  std::string body;
  Pretransform pretransform = Pretransform::none;
};

inline constexpr std::string_view kPayloadPlaceholder = "{PAYLOAD}";

inline AttackTemplate parse_attack_template(const std::string& raw,
                                            const std::string& origin) {
  AttackTemplate tpl;
  std::string body = raw;
  constexpr std::string_view kFrontMatter = "pretransform:";
  if (body.rfind(kFrontMatter, 0) == 0) {
    const std::size_t eol = body.find('\n');
    std::string value = body.substr(kFrontMatter.size(),
                                    (eol == std::string::npos
                                         ? body.size()
                                         : eol) -
                                        kFrontMatter.size());
    while (!value.empty() && (value.front() == ' ' || value.front() == '\t')) {
      value.erase(value.begin());
    }
    while (!value.empty() && (value.back() == ' ' || value.back() == '\r')) {
      value.pop_back();
    }
    if (value == "caesar") {
      tpl.pretransform = Pretransform::caesar;
    } else if (value == "none") {
      tpl.pretransform = Pretransform::none;
    } else {
      throw MalformedTemplate("template '" + origin +
                              "' declares unknown pretransform '" + value +
                              "'");
    }
    body = eol == std::string::npos ? std::string() : body.substr(eol + 1);
  }
  std::size_t count = 0;
  for (std::size_t pos = body.find(kPayloadPlaceholder);
       pos != std::string::npos;
       pos = body.find(kPayloadPlaceholder, pos + kPayloadPlaceholder.size())) {
    ++count;
  }
  if (count != 1) {
    throw MalformedTemplate("template '" + origin + "' must contain exactly "
                            "one {PAYLOAD} placeholder, found " +
                            std::to_string(count));
  }
  tpl.body = body;
  return tpl;
}

inline AttackTemplate load_attack_template(AttackKind kind,
                                           const std::filesystem::path& dir) {
  const std::filesystem::path path = dir / (std::string(to_code(kind)) + ".txt");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || ec) {
    throw MissingTemplate("no template file for attack '" +
                          std::string(to_code(kind)) + "' at '" +
                          path.string() + "'");
  }
  return parse_attack_template(read_file(path), path.string());
}

// Single-pass placeholder substitution; placeholder-like text inside the
// payload is never re-expanded.
inline std::string substitute_payload(const std::string& body,
                                      const std::string& payload) {
  const std::size_t pos = body.find(kPayloadPlaceholder);
  std::string out;
  out.reserve(body.size() + payload.size());
  out.append(body, 0, pos);
  out.append(payload);
  out.append(body, pos + kPayloadPlaceholder.size(), std::string::npos);
  return out;
}

namespace detail {

inline AttackedPrompt render_from_template(AttackKind kind,
                                           const std::string& payload,
                                           const AttackContext& ctx,
                                           const std::string& payload_id) {
  if (payload.empty()) {
    throw EmptyPayload("attack payload is empty");
  }
  const AttackTemplate tpl = load_attack_template(kind, ctx.templates_dir);
  std::string effective = payload;
  if (tpl.pretransform == Pretransform::caesar) {
    effective = caesar_encode(payload, ctx.shift);
  }
  return {substitute_payload(tpl.body, effective), kind, payload_id};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Template-family attacks: persona (aim), restriction-lifting (dan),
// prefix-injection + refusal suppression (combination), cipher-expert
// framing (self_cipher) and nested-narrative framing (deep_inception).

inline AttackedPrompt apply_template_attack(AttackKind kind,
                                            const std::string& payload,
                                            const AttackContext& ctx,
                                            const std::string& payload_id = {}) {
  switch (kind) {
    case AttackKind::aim:
    case AttackKind::dan:
    case AttackKind::combination:
    case AttackKind::self_cipher:
    case AttackKind::deep_inception:
      return detail::render_from_template(kind, payload, ctx, payload_id);
    default:
      throw UnknownAttack("'" + std::string(to_code(kind)) +
                          "' is not a template-family attack");
  }
}

// ---------------------------------------------------------------------------
// dual_use: split the payload into numbered string fragments inside a
// code-completion scaffold. Fragments are contiguous and ceiling-first:
// with length L and n pieces, the first L % n pieces get one extra byte.

namespace detail {

inline std::string escape_code_string(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 8);
  static constexpr char kHex[] = "0123456789abcdef";
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (u < 0x20) {
          out += "\\x";
          out += kHex[u >> 4];
          out += kHex[u & 0xf];
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace detail

// Splits text into n contiguous pieces, ceiling-first.
inline std::vector<std::string> split_fragments(const std::string& payload,
                                                int fragment_count) {
  if (fragment_count < 2) {
    throw BadFragmentCount("fragment count must be at least 2, got " +
                           std::to_string(fragment_count));
  }
  const std::size_t n = static_cast<std::size_t>(fragment_count);
  if (payload.size() < n) {
    throw PayloadTooShort("payload of " + std::to_string(payload.size()) +
                          " bytes cannot be split into " + std::to_string(n) +
                          " fragments");
  }
  const std::size_t base = payload.size() / n;
  const std::size_t rem = payload.size() % n;
  std::vector<std::string> out;
  out.reserve(n);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = base + (i < rem ? 1 : 0);
    out.push_back(payload.substr(offset, len));
    offset += len;
  }
  return out;
}

inline AttackedPrompt dual_use_wrap(const std::string& payload,
                                    int fragment_count,
                                    const AttackContext& ctx,
                                    const std::string& payload_id = {}) {
  if (payload.empty()) {
    throw EmptyPayload("attack payload is empty");
  }
  const std::vector<std::string> fragments =
      split_fragments(payload, fragment_count);
  std::ostringstream code;
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    code << 's' << (i + 1) << " = \"" << detail::escape_code_string(fragments[i])
         << "\"\n";
  }
  code << "payload = s1";
  for (std::size_t i = 1; i < fragments.size(); ++i) {
    code << " + s" << (i + 1);
  }
  const AttackTemplate tpl =
      load_attack_template(AttackKind::dual_use, ctx.templates_dir);
  return {substitute_payload(tpl.body, code.str()), AttackKind::dual_use,
          payload_id};
}

// ---------------------------------------------------------------------------
// code_chameleon: hide the payload behind a reversible encryption — by
// default token-run reversal, which keeps each word and each whitespace
// run intact but reverses their order — and ship the matching decryptor
// inside a code-completion scaffold.

// Reverses the order of the maximal whitespace / non-whitespace runs.
// Applying it twice is the identity.
inline std::string chameleon_encrypt(const std::string& text) {
  std::vector<std::string> runs;
  std::size_t i = 0;
  const auto space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (i < text.size()) {
    std::size_t j = i + 1;
    while (j < text.size() && space(text[j]) == space(text[i])) ++j;
    runs.push_back(text.substr(i, j - i));
    i = j;
  }
  std::string out;
  out.reserve(text.size());
  for (auto it = runs.rbegin(); it != runs.rend(); ++it) out += *it;
  return out;
}

inline std::string chameleon_decrypt(const std::string& text) {
  return chameleon_encrypt(text);  // involution
}

inline AttackedPrompt code_chameleon_wrap(const std::string& payload,
                                          const AttackContext& ctx,
                                          const std::string& payload_id = {}) {
  if (payload.empty()) {
    throw EmptyPayload("attack payload is empty");
  }
  std::ostringstream code;
  code << "encrypted_task = \""
       << detail::escape_code_string(chameleon_encrypt(payload)) << "\"\n\n"
       << "def decrypt(s):\n"
       << "    import re\n"
       << "    return ''.join(reversed(re.findall(r'\\S+|\\s+', s)))\n\n"
       << "task = decrypt(encrypted_task)";
  const AttackTemplate tpl =
      load_attack_template(AttackKind::code_chameleon, ctx.templates_dir);
  return {substitute_payload(tpl.body, code.str()), AttackKind::code_chameleon,
          payload_id};
}

// ---------------------------------------------------------------------------
// zulu: route the payload through machine translation into a
// low-resource language and ask for the answer to be translated back.

inline AttackedPrompt zulu_wrap(const std::string& payload,
                                const AttackContext& ctx,
                                const std::string& payload_id = {}) {
  if (payload.empty()) {
    throw EmptyPayload("attack payload is empty");
  }
  if (ctx.translator == nullptr) {
    throw ConfigError("zulu attack requires a translation client");
  }
  const std::string translated =
      ctx.translator->translate(payload, ctx.zulu_target);
  const AttackTemplate tpl =
      load_attack_template(AttackKind::zulu, ctx.templates_dir);
  return {substitute_payload(tpl.body, translated), AttackKind::zulu,
          payload_id};
}

// ---------------------------------------------------------------------------
// Dispatch.

inline AttackedPrompt apply_attack(AttackKind kind, const std::string& payload,
                                   const AttackContext& ctx,
                                   const std::string& payload_id = {}) {
  switch (kind) {
    case AttackKind::caesar:
      return detail::render_from_template(AttackKind::caesar, payload, ctx,
                                          payload_id);
    case AttackKind::zulu:
      return zulu_wrap(payload, ctx, payload_id);
    case AttackKind::aim:
    case AttackKind::dan:
    case AttackKind::combination:
    case AttackKind::self_cipher:
    case AttackKind::deep_inception:
      return apply_template_attack(kind, payload, ctx, payload_id);
    case AttackKind::dual_use:
      return dual_use_wrap(payload, ctx.fragment_count, ctx, payload_id);
    case AttackKind::code_chameleon:
      return code_chameleon_wrap(payload, ctx, payload_id);
  }
  throw UnknownAttack("unhandled attack kind");
}

}  // namespace sealgate
