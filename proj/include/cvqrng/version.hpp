#pragma once

namespace cvqrng {

inline constexpr const char* kToolName = "cvqrng";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace cvqrng
