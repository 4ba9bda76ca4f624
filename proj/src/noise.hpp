#pragma once

#include <random>

#include "nlsys/grid.hpp"

namespace nlsys::detail {

/// Complex white noise low-pass filtered with exp(-|k|^2 / 2), unit L2 norm.
Field smooth_noise(const GridSpec& grid, std::mt19937_64& rng);

}  // namespace nlsys::detail
