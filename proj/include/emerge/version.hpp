#pragma once

namespace emerge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace emerge
