#pragma once

namespace vlcsec {

inline constexpr const char* kToolName = "vlcsec";
inline constexpr const char* kVersion = "1.0.0";

}  // namespace vlcsec
