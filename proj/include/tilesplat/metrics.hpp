// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/image.hpp"

namespace tilesplat {

inline constexpr double kPsnrCap = 100.0;

/// 10 log10(1 / MSE) over all channels with peak value 1; 100 dB once MSE drops below 1e-10.
/// Throws DimensionMismatch.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Mean SSIM over the three channels (11x11 Gaussian window, sigma 1.5, valid region).
/// Throws DimensionMismatch, or TooSmall when a side is below 11 pixels.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

} // namespace tilesplat
