#pragma once

namespace cafde {
inline constexpr const char* kVersion = "cafde 0.1.0";
}
