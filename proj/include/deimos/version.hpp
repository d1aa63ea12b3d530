#pragma once

namespace deimos {

inline constexpr const char* version_string = "0.1.0";
inline constexpr int container_format_version = 1;

} // namespace deimos
