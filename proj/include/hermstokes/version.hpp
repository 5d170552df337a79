#pragma once

namespace hermstokes {

inline constexpr const char* kVersion = "hermstokes 0.1.0";

}  // namespace hermstokes
