#pragma once

namespace sealgate {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sealgate
