#pragma once

namespace fqkr {
inline constexpr const char* kVersion = "1.0.0";
}
