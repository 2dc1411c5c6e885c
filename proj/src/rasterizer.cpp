// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/rasterizer.hpp"

#include "tilesplat/error.hpp"
#include "tilesplat/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace tilesplat {
namespace {

struct PixelSpan {
    int x0, x1, y0, y1;
};

PixelSpan tile_pixels(const TileGrid& grid, std::size_t tile) {
    const int tx = int(tile % std::size_t(grid.tiles_x)), ty = int(tile / std::size_t(grid.tiles_x));
    return {tx * grid.tile_size, std::min((tx + 1) * grid.tile_size, grid.width), ty * grid.tile_size,
            std::min((ty + 1) * grid.tile_size, grid.height)};
}

// Gaussian falloff exponent at a pixel center.
template <typename T> inline T falloff(const Vec3<T>& conic, T dx, T dy) {
    return T(0.5) * (conic[0] * dx * dx + conic[2] * dy * dy) + conic[1] * dx * dy;
}

void check_sorted(const SortedIntersections& sorted, const TileGrid& grid) {
    if (sorted.ranges.size() != std::size_t(grid.tile_count()) ||
        sorted.isect.keys.size() != sorted.isect.gaussian_ids.size()) {
        throw Error(ErrorCode::ShapeMismatch, "tile ranges do not match the grid");
    }
}

} // namespace

template <typename T>
RenderResult<T> rasterize_forward(const ProjectedSet<T>& proj, const SortedIntersections& sorted,
                                  const TileGrid& grid, int threads) {
    check_sorted(sorted, grid);
    RenderResult<T> out;
    out.image = BasicImage<T>(grid.width, grid.height);
    out.aux.width = grid.width;
    out.aux.height = grid.height;
    out.aux.final_transmittance.assign(std::size_t(grid.width) * grid.height, T(1));
    out.aux.last_contributor.assign(std::size_t(grid.width) * grid.height, 0u);

    const auto& ids = sorted.isect.gaussian_ids;
    const T alpha_max = T(kAlphaMax), alpha_min = T(kAlphaMin), t_min = T(kTransmittanceMin);

    parallel_blocks(threads, std::size_t(grid.tile_count()), [&](int, std::size_t begin, std::size_t end) {
        for (std::size_t tile = begin; tile < end; ++tile) {
            const auto range = sorted.ranges[tile];
            const auto px = tile_pixels(grid, tile);
            for (int y = px.y0; y < px.y1; ++y) {
                for (int x = px.x0; x < px.x1; ++x) {
                    const T pxc = T(x) + T(0.5), pyc = T(y) + T(0.5);
                    T trans = T(1);
                    Vec3<T> color = Vec3<T>::Zero();
                    std::uint32_t walked = 0;
                    for (std::uint32_t k = range.start; k < range.end; ++k) {
                        const auto g = ids[k];
                        const T dx = pxc - proj.means2d[g].x(), dy = pyc - proj.means2d[g].y();
                        const T sigma = falloff(proj.conics[g], dx, dy);
                        if (sigma < T(0)) continue;
                        const T alpha = std::min(alpha_max, proj.opacities[g] * std::exp(-sigma));
                        if (alpha < alpha_min) continue;
                        color += proj.colors[g] * (alpha * trans);
                        trans *= T(1) - alpha;
                        walked = k - range.start + 1;
                        if (trans < t_min) break;
                    }
                    const std::size_t pix = std::size_t(y) * grid.width + x;
                    out.image.pixels[pix] = color;
                    out.aux.final_transmittance[pix] = trans;
                    out.aux.last_contributor[pix] = walked;
                }
            }
        }
    });
    return out;
}

template <typename T>
ScreenGrads<T> rasterize_backward(const ProjectedSet<T>& proj, const SortedIntersections& sorted,
                                  const TileGrid& grid, const RenderAux<T>& aux,
                                  const std::vector<Vec3<T>>& dl_dpixel, int threads) {
    check_sorted(sorted, grid);
    const std::size_t npix = std::size_t(grid.width) * grid.height;
    if (aux.width != grid.width || aux.height != grid.height || aux.final_transmittance.size() != npix ||
        aux.last_contributor.size() != npix) {
        throw Error(ErrorCode::StaleAux, "render aux does not match the tile grid");
    }
    if (dl_dpixel.size() != npix) throw Error(ErrorCode::DimensionMismatch, "pixel gradient size mismatch");

    const auto& ids = sorted.isect.gaussian_ids;
    const T alpha_max = T(kAlphaMax), alpha_min = T(kAlphaMin);
    const int workers = std::max(1, threads);

    std::vector<ScreenGrads<T>> partial(static_cast<std::size_t>(workers));
    for (auto& p : partial) p.reset(proj.size());

    parallel_blocks(workers, std::size_t(grid.tile_count()), [&](int worker, std::size_t begin, std::size_t end) {
        auto& g_out = partial[std::size_t(worker)];
        for (std::size_t tile = begin; tile < end; ++tile) {
            const auto range = sorted.ranges[tile];
            const auto px = tile_pixels(grid, tile);
            for (int y = px.y0; y < px.y1; ++y) {
                for (int x = px.x0; x < px.x1; ++x) {
                    const std::size_t pix = std::size_t(y) * grid.width + x;
                    const Vec3<T>& dl_dc = dl_dpixel[pix];
                    const std::uint32_t walked = aux.last_contributor[pix];
                    if (walked == 0) continue;
                    const T pxc = T(x) + T(0.5), pyc = T(y) + T(0.5);

                    T trans = aux.final_transmittance[pix];
                    Vec3<T> behind = Vec3<T>::Zero(); // sum of contributions after the current entry
                    for (std::uint32_t k = range.start + walked; k-- > range.start;) {
                        const auto g = ids[k];
                        const Vec3<T>& conic = proj.conics[g];
                        const T dx = pxc - proj.means2d[g].x(), dy = pyc - proj.means2d[g].y();
                        const T sigma = falloff(conic, dx, dy);
                        if (sigma < T(0)) continue;
                        const T gauss = std::exp(-sigma);
                        const T raw = proj.opacities[g] * gauss;
                        const T alpha = std::min(alpha_max, raw);
                        if (alpha < alpha_min) continue;

                        const T one_minus = T(1) - alpha;
                        const T t_before = trans / one_minus;
                        const Vec3<T>& col = proj.colors[g];
                        g_out.colors[g] += dl_dc * (alpha * t_before);

                        const T dl_dalpha = dl_dc.dot(col * t_before - behind / one_minus);
                        behind += col * (alpha * t_before);
                        trans = t_before;

                        if (raw > alpha_max) continue; // clamped: alpha is constant
                        g_out.opacities[g] += dl_dalpha * gauss;
                        const T dl_dsigma = -dl_dalpha * proj.opacities[g] * gauss;
                        g_out.conics[g] += Vec3<T>(T(0.5) * dx * dx, dx * dy, T(0.5) * dy * dy) * dl_dsigma;
                        // d(dx)/d(mean) = -1
                        g_out.means2d[g] -= Vec2<T>(conic[0] * dx + conic[1] * dy, conic[1] * dx + conic[2] * dy) * dl_dsigma;
                    }
                }
            }
        }
    });

    for (std::size_t w = 1; w < partial.size(); ++w) partial[0].add(partial[w]);
    return std::move(partial[0]);
}

template RenderResult<float> rasterize_forward(const ProjectedSet<float>&, const SortedIntersections&,
                                               const TileGrid&, int);
template RenderResult<double> rasterize_forward(const ProjectedSet<double>&, const SortedIntersections&,
                                                const TileGrid&, int);
template ScreenGrads<float> rasterize_backward(const ProjectedSet<float>&, const SortedIntersections&,
                                               const TileGrid&, const RenderAux<float>&,
                                               const std::vector<Vec3<float>>&, int);
template ScreenGrads<double> rasterize_backward(const ProjectedSet<double>&, const SortedIntersections&,
                                                const TileGrid&, const RenderAux<double>&,
                                                const std::vector<Vec3<double>>&, int);

} // namespace tilesplat
