#pragma once

namespace kscore {
inline constexpr const char* kVersion = "0.1.0";
}
