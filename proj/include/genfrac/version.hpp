#pragma once

#define GENFRAC_VERSION_MAJOR 0
#define GENFRAC_VERSION_MINOR 1
#define GENFRAC_VERSION_PATCH 0

namespace genfrac {

inline constexpr const char* version = "0.1.0";

} // namespace genfrac
