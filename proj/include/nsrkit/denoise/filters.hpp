#pragma once

#include <cstddef>

#include "nsrkit/imaging/image.hpp"

namespace nsr::denoise {

/// Index into [0, n) with mirror reflection that does not repeat the edge
/// sample (..., 2, 1, 0, 1, 2, ...). Works for offsets of any size.
std::size_t reflect_index(long i, std::size_t n);

/// Per-channel median over a window x window neighbourhood, reflect padding.
imaging::ImageF median_filter(const imaging::ImageF& img, std::size_t window = 5);

/// Locally adaptive Wiener filter. Per channel: local mean m and variance v
/// over the window, noise power nu = mean of v over the channel, and
/// out = m + max(v - nu, 0) / max(v, nu) * (x - m).
imaging::ImageF wiener_filter(const imaging::ImageF& img, std::size_t window = 5);

}  // namespace nsr::denoise
