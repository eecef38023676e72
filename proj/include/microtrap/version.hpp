#pragma once

namespace microtrap {

inline constexpr const char* kToolName = "mtsim";
inline constexpr const char* kVersion = "0.1.0";

} // namespace microtrap
