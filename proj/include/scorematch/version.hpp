#pragma once

namespace scorematch {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace scorematch
