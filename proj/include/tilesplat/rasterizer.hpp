// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/image.hpp"
#include "tilesplat/projection.hpp"
#include "tilesplat/tiling.hpp"

#include <cstdint>
#include <vector>

namespace tilesplat {

inline constexpr double kAlphaMax = 0.99;
inline constexpr double kAlphaMin = 1.0 / 255.0;
inline constexpr double kTransmittanceMin = 1e-4;

/// State saved by the forward pass so the backward pass can replay compositing.
template <typename T> struct RenderAux {
    int width = 0, height = 0;
    std::vector<T> final_transmittance;
    /// Per pixel: number of entries of the pixel's tile range that were walked, i.e. one past
    /// the offset of the last contributor (0 when nothing contributed).
    std::vector<std::uint32_t> last_contributor;
};

template <typename T> struct RenderResult {
    BasicImage<T> image;
    RenderAux<T> aux;
};

/// Front-to-back alpha compositing over each pixel's tile range. Background is black.
template <typename T>
RenderResult<T> rasterize_forward(const ProjectedSet<T>& proj, const SortedIntersections& sorted,
                                  const TileGrid& grid, int threads = 1);

/// Exact gradients of the composited image w.r.t. means2d, conics, colors and opacities.
/// With threads > 1 each worker owns a contiguous block of tiles and partial sums are reduced in
/// worker order, so results are deterministic for a fixed thread count.
template <typename T>
ScreenGrads<T> rasterize_backward(const ProjectedSet<T>& proj, const SortedIntersections& sorted,
                                  const TileGrid& grid, const RenderAux<T>& aux,
                                  const std::vector<Vec3<T>>& dl_dpixel, int threads = 1);

} // namespace tilesplat
