#pragma once

namespace crashfreq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace crashfreq
