#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "nlsys/grid.hpp"

namespace nlsys {

/// Binary field snapshot:
///   "NLSF" | version u32 | dim u32 | n u32 | L f64 | n^dim x (re f64, im f64)
/// All integers and floats little-endian, values row-major.
inline constexpr std::uint32_t snapshot_version = 1;

void write_snapshot(std::ostream& out, const Field& f);
Field read_snapshot(std::istream& in);

void write_snapshot(const std::filesystem::path& path, const Field& f);
Field read_snapshot(const std::filesystem::path& path);

}  // namespace nlsys
