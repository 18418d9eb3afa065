#pragma once

namespace magscan {

inline constexpr const char* kToolName = "magscan";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace magscan
