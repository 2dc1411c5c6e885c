// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/rasterizer.hpp"

namespace tilesplat {

template <typename T> struct FrameState {
    TileGrid grid;
    ProjectedSet<T> proj;
    SortedIntersections sorted;
    RenderResult<T> render;
};

/// Runs every forward stage back to back (no timing).
template <typename T>
FrameState<T> render_frame(const BasicGaussianCloud<T>& cloud, const Camera& camera, int tile_size = 16,
                           int threads = 1);

/// Loss and parameter gradients for one view; shared by the gradient checks and the trainer.
template <typename T> struct ViewGradients {
    T loss = 0;
    FrameState<T> frame;
    ProjectionGrads<T> grads;
};

template <typename T>
ViewGradients<T> view_loss_and_gradients(const BasicGaussianCloud<T>& cloud, const Camera& camera,
                                         const ImageBuffer& target, T lambda_dssim, int tile_size = 16,
                                         int threads = 1);

} // namespace tilesplat
