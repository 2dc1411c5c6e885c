// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

namespace tilesplat {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
template <typename T> std::array<T, kSsimWindow> ssim_taps();

/// Mean SSIM of one channel over the valid (unpadded) region. `x` and `y` are row-major
/// width*height planes. When `grad_x` is non-null it receives d(mean SSIM)/dx.
/// Requires width, height >= 11.
template <typename T> T ssim_channel(const T* x, const T* y, int width, int height, T* grad_x = nullptr);

} // namespace tilesplat
