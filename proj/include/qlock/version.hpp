#pragma once

namespace qlock {

inline constexpr const char* kToolName = "qlock";
inline constexpr const char* kVersion = "0.1.0";

} // namespace qlock
