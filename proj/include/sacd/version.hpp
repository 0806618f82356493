#pragma once

namespace sacd {

inline constexpr const char* kVersion = "sacd 0.1.0";
inline constexpr int kArtifactFormatVersion = 1;

}  // namespace sacd
