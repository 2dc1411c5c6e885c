// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/camera.hpp"
#include "tilesplat/gaussian_cloud.hpp"

#include <cstdint>
#include <vector>

namespace tilesplat {

inline constexpr double kNearPlane = 0.01;
inline constexpr double kCovarianceFloor = 0.3;
/// x/z and y/z enter the projection Jacobian clamped to this multiple of the half field of view.
inline constexpr double kGuardBand = 1.3;

/// Screen-space Gaussians for one camera. Conics are (a, b, c) of the inverse covariance
/// [[a, b], [b, c]]; colors and opacities are activated.
template <typename T> struct ProjectedSet {
    std::vector<Vec2<T>> means2d;
    std::vector<Vec3<T>> conics;
    std::vector<T> depths;
    std::vector<std::int32_t> radii;
    std::vector<std::uint32_t> tile_counts;
    std::vector<Vec3<T>> colors;
    std::vector<T> opacities;
    std::vector<std::uint8_t> visible;

    std::size_t size() const noexcept { return means2d.size(); }
    void resize(std::size_t n);
};

/// Half-open tile rectangle [x0, x1) x [y0, y1).
struct TileRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    std::uint32_t count() const noexcept {
        return (x1 > x0 && y1 > y0) ? std::uint32_t(x1 - x0) * std::uint32_t(y1 - y0) : 0u;
    }
};

/// Tiles overlapped by the axis-aligned square of half-width `radius` around `mean`,
/// clipped to the image. Empty when the square misses the image.
TileRect tile_rect(double mean_x, double mean_y, int radius, const TileGrid& grid);

template <typename T>
ProjectedSet<T> project_forward(const BasicGaussianCloud<T>& cloud, const Camera& camera, const TileGrid& grid);

/// Upstream gradients w.r.t. the projected quantities (output of rasterize_backward).
template <typename T> struct ScreenGrads {
    std::vector<Vec2<T>> means2d;
    std::vector<Vec3<T>> conics;
    std::vector<Vec3<T>> colors;
    std::vector<T> opacities;

    std::size_t size() const noexcept { return means2d.size(); }
    void reset(std::size_t n);
    void add(const ScreenGrads& other);
};

template <typename T> struct ProjectionGrads {
    BasicGaussianCloud<T> params;
    /// |dL/d mean2d| in NDC units, zero for Gaussians that touched no tile.
    std::vector<T> screen_grad_norms;
};

template <typename T>
ProjectionGrads<T> project_backward(const BasicGaussianCloud<T>& cloud, const Camera& camera,
                                    const ProjectedSet<T>& proj, const ScreenGrads<T>& grads);

} // namespace tilesplat
