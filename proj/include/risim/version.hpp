#pragma once

namespace risim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace risim
