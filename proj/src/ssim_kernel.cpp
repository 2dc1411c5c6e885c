// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/ssim_kernel.hpp"

#include "tilesplat/error.hpp"

#include <cmath>
#include <vector>

namespace tilesplat {
namespace {

constexpr int kRadius = kSsimWindow / 2;

// Valid-region separable filtering of `src` (width x height) into (width-10) x (height-10).
template <typename T>
void filter_valid(const std::vector<T>& src, int width, int height, const std::array<T, kSsimWindow>& taps,
                  std::vector<T>& tmp, std::vector<T>& dst) {
    const int ow = width - 2 * kRadius, oh = height - 2 * kRadius;
    tmp.assign(std::size_t(ow) * height, T(0));
    for (int y = 0; y < height; ++y) {
        const T* row = src.data() + std::size_t(y) * width;
        T* out = tmp.data() + std::size_t(y) * ow;
        for (int x = 0; x < ow; ++x) {
            T acc = 0;
            for (int k = 0; k < kSsimWindow; ++k) acc += taps[k] * row[x + k];
            out[x] = acc;
        }
    }
    dst.assign(std::size_t(ow) * oh, T(0));
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            T acc = 0;
            for (int k = 0; k < kSsimWindow; ++k) acc += taps[k] * tmp[std::size_t(y + k) * ow + x];
            dst[std::size_t(y) * ow + x] = acc;
        }
    }
}

// Adjoint of filter_valid: scatters a valid-size map back onto the full image.
template <typename T>
void filter_valid_adjoint(const std::vector<T>& src, int width, int height, const std::array<T, kSsimWindow>& taps,
                          std::vector<T>& tmp, std::vector<T>& dst) {
    const int ow = width - 2 * kRadius, oh = height - 2 * kRadius;
    tmp.assign(std::size_t(ow) * height, T(0));
    for (int y = 0; y < oh; ++y)
        for (int k = 0; k < kSsimWindow; ++k)
            for (int x = 0; x < ow; ++x) tmp[std::size_t(y + k) * ow + x] += taps[k] * src[std::size_t(y) * ow + x];
    dst.assign(std::size_t(width) * height, T(0));
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < ow; ++x) {
            const T v = tmp[std::size_t(y) * ow + x];
            for (int k = 0; k < kSsimWindow; ++k) dst[std::size_t(y) * width + x + k] += taps[k] * v;
        }
}

} // namespace

template <typename T> std::array<T, kSsimWindow> ssim_taps() {
    std::array<double, kSsimWindow> g{};
    double sum = 0.0;
    for (int k = 0; k < kSsimWindow; ++k) {
        const double d = k - kRadius;
        g[k] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[k];
    }
    std::array<T, kSsimWindow> out{};
    for (int k = 0; k < kSsimWindow; ++k) out[k] = static_cast<T>(g[k] / sum);
    return out;
}

template <typename T> T ssim_channel(const T* x, const T* y, int width, int height, T* grad_x) {
    if (width < kSsimWindow || height < kSsimWindow) {
        throw Error(ErrorCode::TooSmall, "SSIM needs images of at least 11x11 pixels");
    }
    const auto taps = ssim_taps<T>();
    const std::size_t n = std::size_t(width) * height;
    std::vector<T> xs(x, x + n), ys(y, y + n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = xs[i] * xs[i];
        yy[i] = ys[i] * ys[i];
        xy[i] = xs[i] * ys[i];
    }
    std::vector<T> tmp, mu_x, mu_y, e_xx, e_yy, e_xy;
    filter_valid(xs, width, height, taps, tmp, mu_x);
    filter_valid(ys, width, height, taps, tmp, mu_y);
    filter_valid(xx, width, height, taps, tmp, e_xx);
    filter_valid(yy, width, height, taps, tmp, e_yy);
    filter_valid(xy, width, height, taps, tmp, e_xy);

    const T c1 = T(kSsimC1), c2 = T(kSsimC2);
    const std::size_t m = mu_x.size();
    std::vector<T> g_mu, g_exx, g_exy;
    if (grad_x) {
        g_mu.resize(m);
        g_exx.resize(m);
        g_exy.resize(m);
    }
    const T inv_m = T(1) / T(m);
    T total = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const T mx = mu_x[i], my = mu_y[i];
        const T a1 = T(2) * mx * my + c1;
        const T a2 = T(2) * (e_xy[i] - mx * my) + c2;
        const T b1 = mx * mx + my * my + c1;
        const T b2 = (e_xx[i] - mx * mx) + (e_yy[i] - my * my) + c2;
        const T num = a1 * a2, den = b1 * b2;
        total += num / den;
        if (grad_x) {
            const T d_num = T(2) * my * a2 - T(2) * my * a1;
            const T d_den = T(2) * mx * b2 - T(2) * mx * b1;
            g_mu[i] = (d_num * den - num * d_den) / (den * den) * inv_m;
            g_exx[i] = -num * b1 / (den * den) * inv_m;
            g_exy[i] = T(2) * a1 / den * inv_m;
        }
    }
    if (grad_x) {
        std::vector<T> f_mu, f_exx, f_exy;
        filter_valid_adjoint(g_mu, width, height, taps, tmp, f_mu);
        filter_valid_adjoint(g_exx, width, height, taps, tmp, f_exx);
        filter_valid_adjoint(g_exy, width, height, taps, tmp, f_exy);
        for (std::size_t i = 0; i < n; ++i) grad_x[i] = f_mu[i] + T(2) * xs[i] * f_exx[i] + ys[i] * f_exy[i];
    }
    return total / T(m);
}

template std::array<float, kSsimWindow> ssim_taps();
template std::array<double, kSsimWindow> ssim_taps();
template float ssim_channel(const float*, const float*, int, int, float*);
template double ssim_channel(const double*, const double*, int, int, double*);

} // namespace tilesplat
