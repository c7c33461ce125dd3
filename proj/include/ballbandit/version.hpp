#pragma once

namespace ballbandit {
inline constexpr const char* kVersion = "0.1.0";
}
