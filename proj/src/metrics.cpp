// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/metrics.hpp"

#include "tilesplat/error.hpp"
#include "tilesplat/ssim_kernel.hpp"

#include <cmath>
#include <vector>

namespace tilesplat {
namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width != b.width || a.height != b.height || a.pixels.size() != b.pixels.size()) {
        throw Error(ErrorCode::DimensionMismatch, "images differ in size");
    }
}

std::vector<double> plane(const ImageBuffer& img, int c) {
    std::vector<double> out(img.pixels.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = img.pixels[i][c];
    return out;
}

} // namespace

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b);
    if (a.pixels.empty()) return kPsnrCap;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            const double d = double(a.pixels[i][c]) - double(b.pixels[i][c]);
            sum += d * d;
        }
    }
    const double mse = sum / (3.0 * double(a.pixels.size()));
    if (mse < 1e-10) return kPsnrCap;
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b);
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto x = plane(a, c);
        const auto y = plane(b, c);
        total += ssim_channel<double>(x.data(), y.data(), a.width, a.height);
    }
    return total / 3.0;
}

} // namespace tilesplat
