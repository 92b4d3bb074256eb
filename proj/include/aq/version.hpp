#pragma once

namespace aq {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kToolName = "aqc";

} // namespace aq
