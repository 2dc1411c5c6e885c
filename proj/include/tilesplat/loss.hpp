// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/camera.hpp"
#include "tilesplat/image.hpp"

#include <vector>

namespace tilesplat {

/// Target image in the channel-planar layout the loss kernel reads (three width*height planes).
template <typename T> struct ResidentImage {
    int width = 0, height = 0;
    std::vector<T> planes;

    const T* channel(int c) const { return planes.data() + std::size_t(c) * width * height; }
};

/// Converts an interleaved host image into the resident planar layout.
/// Throws DimensionMismatch when the image does not match the camera.
template <typename T> ResidentImage<T> copy_image_to_device(const ImageBuffer& target, const Camera& camera);

template <typename T> struct LossResult {
    T loss = 0;
    std::vector<Vec3<T>> dl_dpixel;
};

/// loss = (1 - lambda) * mean|render - target| + lambda * (1 - SSIM(render, target)),
/// with the exact analytic gradient w.r.t. every rendered channel (sign(0) = 0 for L1).
template <typename T>
LossResult<T> loss_gradient(const BasicImage<T>& render, const ResidentImage<T>& target, T lambda_dssim);

} // namespace tilesplat
