// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include "tilesplat/error.hpp"
#include "tilesplat/projection.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace tilesplat;

namespace {

BasicGaussianCloud<double> single(Vec3<double> pos, double scale) {
    BasicGaussianCloud<double> c;
    c.resize(1);
    c.positions[0] = pos;
    c.log_scales[0].setConstant(std::log(scale));
    c.rotations[0] = Vec4<double>(1, 0, 0, 0);
    c.opacity_logits[0] = 0.0;
    return c;
}

} // namespace

TEST(ProjectForward, IsotropicGaussianOnAxis) {
    const Camera cam = oracle::front_camera(64, 64, 100.0);
    const auto proj = project_forward(single({0, 0, 2}, 0.1), cam, TileGrid::for_camera(cam));
    ASSERT_TRUE(proj.visible[0]);
    EXPECT_NEAR(proj.means2d[0].x(), 32.0, 1e-12);
    EXPECT_NEAR(proj.means2d[0].y(), 32.0, 1e-12);
    // Sigma' = diag((100 * 0.1 / 2)^2 + 0.3) = diag(25.3); conic is its inverse.
    EXPECT_NEAR(proj.conics[0][0], 1.0 / 25.3, 1e-12);
    EXPECT_NEAR(proj.conics[0][1], 0.0, 1e-12);
    EXPECT_NEAR(proj.conics[0][2], 1.0 / 25.3, 1e-12);
    EXPECT_EQ(proj.radii[0], 16);
    EXPECT_DOUBLE_EQ(proj.depths[0], 2.0);
    EXPECT_DOUBLE_EQ(proj.opacities[0], 0.5);
}

TEST(ProjectForward, BehindCameraIsCulled) {
    const Camera cam = oracle::front_camera(64, 64, 100.0);
    const auto proj = project_forward(single({0, 0, -1}, 0.1), cam, TileGrid::for_camera(cam));
    EXPECT_FALSE(proj.visible[0]);
    EXPECT_EQ(proj.tile_counts[0], 0u);
}

TEST(ProjectForward, OffscreenSquareTouchesNoTile) {
    const Camera cam = oracle::front_camera(64, 64, 100.0);
    const auto proj = project_forward(single({10, 0, 2}, 0.01), cam, TileGrid::for_camera(cam));
    EXPECT_EQ(proj.tile_counts[0], 0u);
}

TEST(ProjectForward, NonFiniteInputThrows) {
    const Camera cam = oracle::front_camera(16, 16, 16.0);
    auto c = single({0, 0, 2}, 0.1);
    c.colors[0][1] = std::numeric_limits<double>::quiet_NaN();
    try {
        project_forward(c, cam, TileGrid::for_camera(cam));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFiniteParameter);
    }
}

TEST(ProjectForward, InvariantsOnRandomClouds) {
    const Camera cam = oracle::front_camera(80, 48, 60.0);
    const auto grid = TileGrid::for_camera(cam);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto c = oracle::random_cloud<float>(seed, 300, 0.01, 0.6, 0.05, 0.95);
        const auto proj = project_forward(c, cam, grid);
        for (std::size_t i = 0; i < proj.size(); ++i) {
            if (!proj.visible[i]) {
                EXPECT_EQ(proj.tile_counts[i], 0u);
                continue;
            }
            const auto& q = proj.conics[i];
            EXPECT_GT(q[0], 0.0f);
            EXPECT_GT(q[2], 0.0f);
            EXPECT_GT(double(q[0]) * q[2] - double(q[1]) * q[1], 0.0);
            EXPECT_GT(proj.depths[i], float(kNearPlane));
            EXPECT_LE(proj.tile_counts[i], std::uint32_t(grid.tile_count()));
            EXPECT_EQ(proj.tile_counts[i],
                      oracle::overlapped_tiles(proj.means2d[i].x(), proj.means2d[i].y(), proj.radii[i], grid).size());
        }
    }
}

TEST(ProjectBackward, ZeroUpstreamGivesZeroGradients) {
    const Camera cam = oracle::front_camera(16, 16, 16.0);
    const auto c = oracle::random_cloud<double>(5, 6, 0.1, 0.4, 0.2, 0.9);
    const auto proj = project_forward(c, cam, TileGrid::for_camera(cam));
    ScreenGrads<double> g;
    g.reset(c.size());
    const auto out = project_backward(c, cam, proj, g);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t k = 0; k < 14; ++k) EXPECT_EQ(scalar_at(out.params, i, k), 0.0);
}

TEST(ProjectBackward, OpacityChainIsSigmoidDerivative) {
    const Camera cam = oracle::front_camera(16, 16, 16.0);
    auto c = oracle::random_cloud<double>(8, 3, 0.1, 0.4, 0.2, 0.9);
    const auto proj = project_forward(c, cam, TileGrid::for_camera(cam));
    ScreenGrads<double> g;
    g.reset(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) g.opacities[i] = 0.7 + double(i);
    const auto out = project_backward(c, cam, proj, g);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double s = sigmoid(c.opacity_logits[i]);
        EXPECT_NEAR(out.params.opacity_logits[i], g.opacities[i] * s * (1 - s), 1e-14);
    }
}

TEST(ProjectBackward, ScreenGradientsMatchFiniteDifferences) {
    // d(sum of weighted means2d and conics)/d(params) against central differences.
    const Camera cam = oracle::front_camera(32, 32, 30.0);
    const auto grid = TileGrid::for_camera(cam);
    const auto c = oracle::random_cloud<double>(21, 4, 0.1, 0.4, 0.2, 0.9);
    ScreenGrads<double> g;
    g.reset(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        g.means2d[i] = Vec2<double>(0.3 + 0.1 * double(i), -0.2);
        g.conics[i] = Vec3<double>(1.5, -0.7, 0.9);
        g.colors[i] = Vec3<double>(0.2, -0.4, 0.6);
        g.opacities[i] = -0.3;
    }
    auto objective = [&](const BasicGaussianCloud<double>& cc) {
        const auto p = project_forward(cc, cam, grid);
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            s += g.means2d[i].dot(p.means2d[i]) + g.conics[i].dot(p.conics[i]) + g.colors[i].dot(p.colors[i]) +
                 g.opacities[i] * p.opacities[i];
        }
        return s;
    };
    const auto proj = project_forward(c, cam, grid);
    const auto an = project_backward(c, cam, proj, g).params;
    const double h = 1e-6;
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t k = 0; k < 14; ++k) {
            auto plus = c, minus = c;
            scalar_at(plus, i, k) += h;
            scalar_at(minus, i, k) -= h;
            const double fd = (objective(plus) - objective(minus)) / (2 * h);
            EXPECT_NEAR(scalar_at(an, i, k), fd, 1e-5 * std::max(1.0, std::fabs(fd))) << "gaussian " << i << " k " << k;
        }
    }
}
