#pragma once

namespace stle {
inline constexpr const char* kVersion = "0.1.0";
}
