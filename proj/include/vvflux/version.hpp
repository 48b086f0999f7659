#pragma once

namespace vvflux {
inline constexpr const char* kVersion = "0.1.0";
}
