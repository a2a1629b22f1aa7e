#pragma once

namespace dbar {

inline constexpr const char* kToolName = "eit-dbar";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kConfigSchema = "eit-dbar/1";

}  // namespace dbar
