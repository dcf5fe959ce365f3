#pragma once

namespace kinkflow {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kinkflow
