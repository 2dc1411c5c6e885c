// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/camera.hpp"
#include "tilesplat/projection.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace tilesplat {

struct IndexOffsets {
    std::vector<std::uint64_t> offsets;
    std::uint64_t total = 0;
};

/// Exclusive prefix sum of per-Gaussian tile counts.
IndexOffsets compute_index_offsets(std::span<const std::uint32_t> counts);

/// Bit pattern of a positive float; ordering of the bits matches ordering of the values.
std::uint32_t depth_bits(float depth);

inline std::uint32_t tile_of_key(std::uint64_t key) { return static_cast<std::uint32_t>(key >> 32); }

struct Intersections {
    std::vector<std::uint64_t> keys; // (tile << 32) | depth_bits
    std::vector<std::uint32_t> gaussian_ids;

    std::size_t size() const noexcept { return keys.size(); }
};

template <typename T>
Intersections generate_keys(const ProjectedSet<T>& proj, const IndexOffsets& offsets, const TileGrid& grid);

/// Stable ascending sort by key (LSD radix sort); ids are permuted identically.
void sort_intersections(Intersections& isect);

struct TileRange {
    std::uint32_t start = 0, end = 0;
    std::uint32_t size() const noexcept { return end - start; }
    bool operator==(const TileRange&) const = default;
};

/// One half-open range per tile id; tiles without entries get an empty range.
/// Throws UnsortedInput on a descending adjacent pair.
std::vector<TileRange> compute_tile_ranges(std::span<const std::uint64_t> sorted_keys, const TileGrid& grid);

struct SortedIntersections {
    Intersections isect;
    std::vector<TileRange> ranges;
};

} // namespace tilesplat
