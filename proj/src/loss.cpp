// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/loss.hpp"

#include "tilesplat/error.hpp"
#include "tilesplat/ssim_kernel.hpp"

#include <cmath>

namespace tilesplat {

template <typename T> ResidentImage<T> copy_image_to_device(const ImageBuffer& target, const Camera& camera) {
    if (target.width != camera.width || target.height != camera.height ||
        target.pixels.size() != std::size_t(target.width) * target.height) {
        throw Error(ErrorCode::DimensionMismatch, "target image does not match the camera");
    }
    ResidentImage<T> out;
    out.width = target.width;
    out.height = target.height;
    const std::size_t n = target.pixels.size();
    out.planes.resize(3 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) out.planes[std::size_t(c) * n + i] = static_cast<T>(target.pixels[i][c]);
    return out;
}

template <typename T>
LossResult<T> loss_gradient(const BasicImage<T>& render, const ResidentImage<T>& target, T lambda_dssim) {
    if (render.width != target.width || render.height != target.height ||
        target.planes.size() != 3 * render.pixels.size()) {
        throw Error(ErrorCode::DimensionMismatch, "render and target differ in size");
    }
    const std::size_t n = render.pixels.size();
    LossResult<T> out;
    out.dl_dpixel.assign(n, Vec3<T>::Zero());
    const T inv_count = T(1) / T(3 * n);
    const T w_l1 = T(1) - lambda_dssim;

    T l1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            const T diff = render.pixels[i][c] - target.planes[std::size_t(c) * n + i];
            l1 += std::abs(diff);
            const T sign = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
            out.dl_dpixel[i][c] = w_l1 * sign * inv_count;
        }
    }
    out.loss = w_l1 * l1 * inv_count;

    if (lambda_dssim != T(0)) {
        std::vector<T> plane(n), grad(n);
        T ssim_sum = 0;
        for (int c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < n; ++i) plane[i] = render.pixels[i][c];
            ssim_sum += ssim_channel(plane.data(), target.channel(c), render.width, render.height, grad.data());
            for (std::size_t i = 0; i < n; ++i) out.dl_dpixel[i][c] -= lambda_dssim * grad[i] / T(3);
        }
        out.loss += lambda_dssim * (T(1) - ssim_sum / T(3));
    }
    return out;
}

template ResidentImage<float> copy_image_to_device(const ImageBuffer&, const Camera&);
template ResidentImage<double> copy_image_to_device(const ImageBuffer&, const Camera&);
template LossResult<float> loss_gradient(const BasicImage<float>&, const ResidentImage<float>&, float);
template LossResult<double> loss_gradient(const BasicImage<double>&, const ResidentImage<double>&, double);

} // namespace tilesplat
