// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/render.hpp"

#include "tilesplat/loss.hpp"

namespace tilesplat {

template <typename T>
FrameState<T> render_frame(const BasicGaussianCloud<T>& cloud, const Camera& camera, int tile_size, int threads) {
    FrameState<T> f;
    f.grid = TileGrid::for_camera(camera, tile_size);
    f.proj = project_forward(cloud, camera, f.grid);
    const auto offsets = compute_index_offsets(f.proj.tile_counts);
    f.sorted.isect = generate_keys(f.proj, offsets, f.grid);
    sort_intersections(f.sorted.isect);
    f.sorted.ranges = compute_tile_ranges(f.sorted.isect.keys, f.grid);
    f.render = rasterize_forward(f.proj, f.sorted, f.grid, threads);
    return f;
}

template <typename T>
ViewGradients<T> view_loss_and_gradients(const BasicGaussianCloud<T>& cloud, const Camera& camera,
                                         const ImageBuffer& target, T lambda_dssim, int tile_size, int threads) {
    ViewGradients<T> out;
    out.frame = render_frame(cloud, camera, tile_size, threads);
    const auto resident = copy_image_to_device<T>(target, camera);
    auto loss = loss_gradient(out.frame.render.image, resident, lambda_dssim);
    out.loss = loss.loss;
    const auto screen = rasterize_backward(out.frame.proj, out.frame.sorted, out.frame.grid, out.frame.render.aux,
                                           loss.dl_dpixel, threads);
    out.grads = project_backward(cloud, camera, out.frame.proj, screen);
    return out;
}

template FrameState<float> render_frame(const BasicGaussianCloud<float>&, const Camera&, int, int);
template FrameState<double> render_frame(const BasicGaussianCloud<double>&, const Camera&, int, int);
template ViewGradients<float> view_loss_and_gradients(const BasicGaussianCloud<float>&, const Camera&,
                                                      const ImageBuffer&, float, int, int);
template ViewGradients<double> view_loss_and_gradients(const BasicGaussianCloud<double>&, const Camera&,
                                                       const ImageBuffer&, double, int, int);

} // namespace tilesplat
