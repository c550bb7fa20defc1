#pragma once

namespace remglass {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace remglass
