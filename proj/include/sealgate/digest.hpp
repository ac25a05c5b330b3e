#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "sealgate/errors.hpp"

namespace sealgate {

// 64-bit FNV-1a. Used for split bucketing, manifest digests and audit
// prompt digests. Deterministic across platforms; not cryptographic.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t state = 1469598103934665603ULL) {
  constexpr std::uint64_t prime = 1099511628211ULL;
  for (unsigned char b : bytes) {
    state ^= b;
    state *= prime;
  }
  return state;
}

// Finalizer (MurmurHash3 fmix64) giving full avalanche. FNV-1a alone
// barely propagates the last input bytes into the top bits, which
// skews anything that buckets on them.
inline std::uint64_t mix_bits(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

inline std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

inline std::string digest_of(std::string_view bytes) {
  return "fnv64:" + to_hex(fnv1a64(bytes));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string digest_of_file(const std::filesystem::path& path) {
  return digest_of(read_file(path));
}

}  // namespace sealgate
