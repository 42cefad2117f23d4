#pragma once

namespace spk {

inline constexpr const char* kToolName = "scatterkit";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace spk
