#pragma once

#include <string>

namespace nlsys {

/// Version stamp written next to every CSV output; bumped whenever a header changes.
inline constexpr int output_schema_version = 1;

/// Round-trip decimal rendering (17 significant digits).
std::string format_double(double value);

inline std::string format_bool(bool value) { return value ? "1" : "0"; }

}  // namespace nlsys
