#pragma once

namespace copulalab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace copulalab
