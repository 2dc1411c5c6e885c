// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/tiling.hpp"

#include "tilesplat/error.hpp"

#include <array>
#include <bit>
#include <string>

namespace tilesplat {

IndexOffsets compute_index_offsets(std::span<const std::uint32_t> counts) {
    IndexOffsets out;
    out.offsets.resize(counts.size());
    std::uint64_t running = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out.offsets[i] = running;
        running += counts[i];
    }
    out.total = running;
    return out;
}

std::uint32_t depth_bits(float depth) { return std::bit_cast<std::uint32_t>(depth); }

template <typename T>
Intersections generate_keys(const ProjectedSet<T>& proj, const IndexOffsets& offsets, const TileGrid& grid) {
    if (offsets.offsets.size() != proj.size()) {
        throw Error(ErrorCode::ShapeMismatch, "offsets were not computed from this projected set");
    }
    Intersections out;
    out.keys.resize(offsets.total);
    out.gaussian_ids.resize(offsets.total);
    for (std::size_t i = 0; i < proj.size(); ++i) {
        if (!proj.visible[i]) continue;
        if (!(proj.depths[i] > T(0))) {
            throw Error(ErrorCode::NegativeDepth, "visible Gaussian " + std::to_string(i) + " has non-positive depth");
        }
        if (proj.tile_counts[i] == 0) continue;
        const auto rect = tile_rect(double(proj.means2d[i].x()), double(proj.means2d[i].y()), proj.radii[i], grid);
        if (rect.count() != proj.tile_counts[i] || offsets.offsets[i] + rect.count() > offsets.total) {
            throw Error(ErrorCode::ShapeMismatch, "tile counts disagree with the projected footprint");
        }
        const std::uint64_t depth = depth_bits(static_cast<float>(proj.depths[i]));
        std::uint64_t slot = offsets.offsets[i];
        for (int ty = rect.y0; ty < rect.y1; ++ty) {
            for (int tx = rect.x0; tx < rect.x1; ++tx) {
                const std::uint64_t tile = std::uint64_t(ty) * grid.tiles_x + tx;
                out.keys[slot] = (tile << 32) | depth;
                out.gaussian_ids[slot] = static_cast<std::uint32_t>(i);
                ++slot;
            }
        }
    }
    return out;
}

void sort_intersections(Intersections& isect) {
    if (isect.keys.size() != isect.gaussian_ids.size()) {
        throw Error(ErrorCode::ShapeMismatch, "keys and values differ in length");
    }
    const std::size_t n = isect.keys.size();
    if (n < 2) return;

    std::vector<std::uint64_t> keys_tmp(n);
    std::vector<std::uint32_t> ids_tmp(n);
    auto* src_k = &isect.keys;
    auto* src_v = &isect.gaussian_ids;
    auto* dst_k = &keys_tmp;
    auto* dst_v = &ids_tmp;

    for (int shift = 0; shift < 64; shift += 8) {
        std::array<std::size_t, 256> hist{};
        for (auto k : *src_k) ++hist[(k >> shift) & 0xff];
        // A digit shared by every key leaves the order untouched.
        if (hist[((*src_k)[0] >> shift) & 0xff] == n) continue;

        std::size_t sum = 0;
        for (auto& h : hist) {
            const auto c = h;
            h = sum;
            sum += c;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const auto k = (*src_k)[i];
            const auto pos = hist[(k >> shift) & 0xff]++;
            (*dst_k)[pos] = k;
            (*dst_v)[pos] = (*src_v)[i];
        }
        std::swap(src_k, dst_k);
        std::swap(src_v, dst_v);
    }
    if (src_k != &isect.keys) {
        isect.keys.swap(keys_tmp);
        isect.gaussian_ids.swap(ids_tmp);
    }
}

std::vector<TileRange> compute_tile_ranges(std::span<const std::uint64_t> sorted_keys, const TileGrid& grid) {
    std::vector<TileRange> ranges(static_cast<std::size_t>(grid.tile_count()));
    const std::size_t n = sorted_keys.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && sorted_keys[i - 1] > sorted_keys[i]) {
            throw Error(ErrorCode::UnsortedInput, "keys descend at index " + std::to_string(i));
        }
        const auto tile = tile_of_key(sorted_keys[i]);
        if (tile >= ranges.size()) throw Error(ErrorCode::ShapeMismatch, "key refers to a tile outside the grid");
        if (i == 0 || tile_of_key(sorted_keys[i - 1]) != tile) ranges[tile].start = static_cast<std::uint32_t>(i);
        if (i + 1 == n || tile_of_key(sorted_keys[i + 1]) != tile) ranges[tile].end = static_cast<std::uint32_t>(i + 1);
    }
    return ranges;
}

template Intersections generate_keys(const ProjectedSet<float>&, const IndexOffsets&, const TileGrid&);
template Intersections generate_keys(const ProjectedSet<double>&, const IndexOffsets&, const TileGrid&);

} // namespace tilesplat
