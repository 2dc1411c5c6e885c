// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include "tilesplat/error.hpp"
#include "tilesplat/tiling.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace tilesplat;

TEST(IndexOffsets, ExclusiveScan) {
    const std::vector<std::uint32_t> counts{2, 0, 3, 1};
    const auto r = compute_index_offsets(counts);
    EXPECT_EQ(r.offsets, (std::vector<std::uint64_t>{0, 2, 2, 5}));
    EXPECT_EQ(r.total, 6u);
    const auto empty = compute_index_offsets(std::vector<std::uint32_t>{});
    EXPECT_TRUE(empty.offsets.empty());
    EXPECT_EQ(empty.total, 0u);
}

TEST(IndexOffsets, MatchesSequentialOracle) {
    std::mt19937 rng(4);
    std::vector<std::uint32_t> counts(1000);
    for (auto& c : counts) c = rng() % 50;
    const auto r = compute_index_offsets(counts);
    EXPECT_EQ(r.offsets, oracle::exclusive_scan(counts));
    EXPECT_EQ(r.offsets.size(), counts.size());
    EXPECT_EQ(r.offsets.back() + counts.back(), r.total);
}

TEST(DepthBits, MonotoneForPositiveFloats) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<float> u(1e-3f, 1e4f);
    EXPECT_LT(depth_bits(1.0f), depth_bits(2.0f));
    for (int i = 0; i < 10000; ++i) {
        const float a = u(rng), b = u(rng);
        if (a < b) { EXPECT_LT(depth_bits(a), depth_bits(b)); }
        if (a > b) { EXPECT_GT(depth_bits(a), depth_bits(b)); }
    }
}

TEST(GenerateKeys, OneGaussianTwoTiles) {
    const auto grid = TileGrid::for_image(80, 16, 16);
    ProjectedSet<float> proj;
    proj.resize(1);
    proj.visible[0] = 1;
    proj.depths[0] = 2.0f;
    proj.means2d[0] = Vec2<float>(64.0f, 8.0f);
    proj.radii[0] = 4;
    proj.tile_counts[0] = 2;
    const auto offsets = compute_index_offsets(proj.tile_counts);
    const auto isect = generate_keys(proj, offsets, grid);
    ASSERT_EQ(isect.size(), 2u);
    EXPECT_EQ(tile_of_key(isect.keys[0]), 3u);
    EXPECT_EQ(tile_of_key(isect.keys[1]), 4u);
    EXPECT_EQ(isect.keys[0] & 0xffffffffu, depth_bits(2.0f));
    EXPECT_EQ(isect.keys[1] & 0xffffffffu, depth_bits(2.0f));
    EXPECT_EQ(isect.gaussian_ids[0], 0u);
}

TEST(GenerateKeys, NoVisibleGaussians) {
    const auto grid = TileGrid::for_image(32, 32, 16);
    ProjectedSet<float> proj;
    proj.resize(3);
    const auto isect = generate_keys(proj, compute_index_offsets(proj.tile_counts), grid);
    EXPECT_EQ(isect.size(), 0u);
}

TEST(GenerateKeys, NegativeDepthThrows) {
    const auto grid = TileGrid::for_image(32, 32, 16);
    ProjectedSet<float> proj;
    proj.resize(1);
    proj.visible[0] = 1;
    proj.depths[0] = -1.0f;
    proj.radii[0] = 3;
    proj.means2d[0] = Vec2<float>(5, 5);
    proj.tile_counts[0] = 1;
    try {
        generate_keys(proj, compute_index_offsets(proj.tile_counts), grid);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NegativeDepth);
    }
}

TEST(SortIntersections, SmallAndStable) {
    Intersections isect;
    isect.keys = {5, 1, 3};
    isect.gaussian_ids = {10, 11, 12};
    sort_intersections(isect);
    EXPECT_EQ(isect.keys, (std::vector<std::uint64_t>{1, 3, 5}));
    EXPECT_EQ(isect.gaussian_ids, (std::vector<std::uint32_t>{11, 12, 10}));

    isect.keys = {7, 7, 2, 7};
    isect.gaussian_ids = {0, 1, 2, 3};
    sort_intersections(isect);
    EXPECT_EQ(isect.gaussian_ids, (std::vector<std::uint32_t>{2, 0, 1, 3}));
}

TEST(SortIntersections, MatchesStableComparisonSort) {
    std::mt19937_64 rng(12);
    Intersections isect;
    for (int i = 0; i < 100000; ++i) {
        // Few distinct high words and coarse depths so ties are common.
        isect.keys.push_back(((rng() % 300) << 32) | (rng() % 5000));
        isect.gaussian_ids.push_back(std::uint32_t(i));
    }
    std::vector<std::pair<std::uint64_t, std::uint32_t>> ref;
    for (std::size_t i = 0; i < isect.size(); ++i) ref.emplace_back(isect.keys[i], isect.gaussian_ids[i]);
    std::stable_sort(ref.begin(), ref.end(), [](auto& a, auto& b) { return a.first < b.first; });
    sort_intersections(isect);
    for (std::size_t i = 0; i < ref.size(); ++i) {
        ASSERT_EQ(isect.keys[i], ref[i].first);
        ASSERT_EQ(isect.gaussian_ids[i], ref[i].second);
    }
}

TEST(TileRanges, SmallExampleAndEmpty) {
    const auto grid = TileGrid::for_image(64, 16, 16);
    const std::vector<std::uint64_t> keys{0ull << 32, 0ull << 32, 1ull << 32, 3ull << 32};
    const auto r = compute_tile_ranges(keys, grid);
    ASSERT_EQ(r.size(), 4u);
    EXPECT_EQ(r[0], (TileRange{0, 2}));
    EXPECT_EQ(r[1], (TileRange{2, 3}));
    EXPECT_EQ(r[2].size(), 0u);
    EXPECT_EQ(r[3], (TileRange{3, 4}));
    for (const auto& t : compute_tile_ranges({}, grid)) EXPECT_EQ(t.size(), 0u);
}

TEST(TileRanges, UnsortedThrows) {
    const auto grid = TileGrid::for_image(64, 16, 16);
    const std::vector<std::uint64_t> keys{2ull << 32, 1ull << 32};
    try {
        compute_tile_ranges(keys, grid);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnsortedInput);
    }
}

TEST(TileRanges, MatchesLinearScan) {
    const auto grid = TileGrid::for_image(160, 160, 16);
    std::mt19937_64 rng(3);
    std::vector<std::uint64_t> keys;
    for (int i = 0; i < 5000; ++i) keys.push_back(((rng() % 100) << 32) | (rng() & 0xffff));
    std::sort(keys.begin(), keys.end());
    const auto ranges = compute_tile_ranges(keys, grid);
    std::vector<TileRange> ref(100);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const auto t = keys[i] >> 32;
        if (i == 0 || (keys[i - 1] >> 32) != t) ref[t].start = std::uint32_t(i);
        ref[t].end = std::uint32_t(i + 1);
    }
    for (std::size_t t = 0; t < 100; ++t) {
        if (ref[t].end == 0) {
            EXPECT_EQ(ranges[t].size(), 0u);
        } else {
            EXPECT_EQ(ranges[t], ref[t]) << "tile " << t;
        }
    }
}

TEST(TileGrid, CeilDivision) {
    const auto g = TileGrid::for_image(33, 17, 16);
    EXPECT_EQ(g.tiles_x, 3);
    EXPECT_EQ(g.tiles_y, 2);
    EXPECT_EQ(g.tile_count(), 6);
}
