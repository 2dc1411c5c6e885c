// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include "tilesplat/error.hpp"
#include "tilesplat/loss.hpp"
#include "tilesplat/ssim_kernel.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tilesplat;

TEST(CopyImageToDevice, PlanarCopyMatches) {
    const auto img = oracle::random_image(5, 64, 64);
    const Camera cam = oracle::front_camera(64, 64, 64.0);
    const auto r = copy_image_to_device<double>(img, cam);
    ASSERT_EQ(r.planes.size(), 3u * 64 * 64);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_EQ(r.channel(c)[i], double(img.pixels[i][c]));
}

TEST(CopyImageToDevice, DimensionMismatch) {
    const auto img = oracle::random_image(5, 32, 32);
    try {
        copy_image_to_device<float>(img, oracle::front_camera(64, 32, 10.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(LossGradient, IdenticalImagesGiveZero) {
    const auto img = oracle::random_image(1, 16, 16);
    const auto r = loss_gradient(img.cast<double>(), copy_image_to_device<double>(img, oracle::front_camera(16, 16, 1)),
                                 0.0);
    EXPECT_EQ(r.loss, 0.0);
    for (const auto& g : r.dl_dpixel) EXPECT_EQ(g, Vec3<double>::Zero());
}

TEST(LossGradient, SingleResidualL1) {
    const int w = 12, h = 12;
    const double n = w * h;
    ImageBuffer target(w, h);
    for (auto& p : target.pixels) p = Vec3<float>(0.25f, 0.25f, 0.25f);
    auto render = target.cast<double>();
    render.at(4, 7)[1] += 0.5;
    const auto r = loss_gradient(render, copy_image_to_device<double>(target, oracle::front_camera(w, h, 1)), 0.0);
    EXPECT_NEAR(r.loss, 0.5 / (3 * n), 1e-15);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double expected = (x == 4 && y == 7 && c == 1) ? 1.0 / (3 * n) : 0.0;
                EXPECT_EQ(r.dl_dpixel[std::size_t(y * w + x)][c], expected);
            }
        }
    }
}

TEST(LossGradient, MixedLossMatchesFiniteDifferences) {
    const int w = 16, h = 16;
    const auto target = oracle::random_image(8, w, h);
    const auto resident = copy_image_to_device<double>(target, oracle::front_camera(w, h, 1));
    const auto render = oracle::random_image(9, w, h).cast<double>();
    const auto r = loss_gradient(render, resident, 0.2);
    const double step = 1e-6;
    for (std::size_t i = 0; i < render.pixels.size(); i += 7) {
        for (int c = 0; c < 3; ++c) {
            auto plus = render, minus = render;
            plus.pixels[i][c] += step;
            minus.pixels[i][c] -= step;
            const double fd = (loss_gradient(plus, resident, 0.2).loss - loss_gradient(minus, resident, 0.2).loss) /
                              (2 * step);
            EXPECT_NEAR(r.dl_dpixel[i][c], fd, 1e-4 * std::max(std::fabs(fd), 1e-3)) << i << ":" << c;
        }
    }
}

TEST(SsimKernel, TapsAreNormalizedAndSymmetric) {
    const auto t = ssim_taps<double>();
    double sum = 0;
    for (double v : t) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    for (int i = 0; i < kSsimWindow; ++i) EXPECT_DOUBLE_EQ(t[std::size_t(i)], t[std::size_t(kSsimWindow - 1 - i)]);
}

TEST(SsimKernel, MatchesBruteForceWindow) {
    const int w = 23, h = 19;
    const auto a = oracle::random_image(30, w, h), b = oracle::random_image(31, w, h);
    std::vector<double> x(std::size_t(w * h)), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = a.pixels[i][0];
        y[i] = b.pixels[i][0];
    }
    EXPECT_NEAR(ssim_channel(x.data(), y.data(), w, h), oracle::brute_force_ssim(x, y, w, h), 1e-12);
}
