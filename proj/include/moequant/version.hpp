#pragma once

namespace moequant {

inline constexpr const char* kVersion = "0.1.0";

}
