// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include "tilesplat/adam.hpp"
#include "tilesplat/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tilesplat;

namespace {

GaussianCloud scalar_cloud(float position_x) {
    GaussianCloud c;
    c.resize(1);
    c.positions[0].x() = position_x;
    c.rotations[0] = Vec4<float>(1, 0, 0, 0);
    return c;
}

} // namespace

TEST(AdamStep, ZeroGradientsOnlyCountTheStep) {
    auto cloud = normalize_rotations(oracle::random_cloud<float>(4, 50, 0.1, 0.4, 0.1, 0.9));
    const auto before = cloud;
    auto state = AdamState::for_cloud(cloud.size());
    GaussianCloud grads;
    grads.resize(cloud.size());
    adam_step(cloud, grads, state);
    EXPECT_EQ(state.step_count, 1);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (std::size_t k = 0; k < 14; ++k) {
            if (k >= 6 && k < 10) {
                EXPECT_NEAR(scalar_at(cloud, i, k), scalar_at(before, i, k), 1e-6f);
            } else {
                EXPECT_EQ(scalar_at(cloud, i, k), scalar_at(before, i, k));
            }
        }
    }
}

TEST(AdamStep, FirstStepIsLearningRate) {
    auto cloud = scalar_cloud(0.0f);
    LearningRates lr;
    lr.positions = 0.1;
    auto state = AdamState::for_cloud(1, lr);
    state.eps = 1e-8;
    GaussianCloud grads;
    grads.resize(1);
    grads.positions[0].x() = 1.0f;
    adam_step(cloud, grads, state);
    // m_hat = 1, v_hat = 1, so the update is -0.1 / (1 + 1e-8).
    EXPECT_NEAR(cloud.positions[0].x(), -0.1 / (1.0 + 1e-8), 1e-7);
    EXPECT_FLOAT_EQ(state.first_moment.positions[0].x(), 0.1f);
    EXPECT_FLOAT_EQ(state.second_moment.positions[0].x(), 0.001f);
}

TEST(AdamStep, DescendsAQuadratic) {
    auto cloud = scalar_cloud(1.0f);
    LearningRates lr;
    lr.positions = 0.01;
    auto state = AdamState::for_cloud(1, lr);
    double prev = 1.0;
    for (int step = 0; step < 100; ++step) {
        GaussianCloud grads;
        grads.resize(1);
        grads.positions[0].x() = 2.0f * cloud.positions[0].x();
        adam_step(cloud, grads, state);
        const double f = double(cloud.positions[0].x()) * cloud.positions[0].x();
        EXPECT_LT(f, prev) << "step " << step;
        prev = f;
    }
}

TEST(AdamStep, RotationsStayNormalized) {
    auto cloud = normalize_rotations(oracle::random_cloud<float>(6, 20, 0.1, 0.4, 0.1, 0.9));
    auto state = AdamState::for_cloud(cloud.size());
    state.lr.rotations = 0.3;
    GaussianCloud grads;
    grads.resize(cloud.size());
    for (auto& q : grads.rotations) q = Vec4<float>(0.5f, -1.0f, 2.0f, 0.25f);
    adam_step(cloud, grads, state);
    for (const auto& q : cloud.rotations) EXPECT_NEAR(q.norm(), 1.0f, 1e-6f);
}

TEST(AdamStep, ShapeMismatchThrows) {
    auto cloud = scalar_cloud(0.0f);
    auto state = AdamState::for_cloud(1);
    GaussianCloud grads;
    grads.resize(2);
    try {
        adam_step(cloud, grads, state);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
    }
}

TEST(AdamState, ResizeGatherAndReset) {
    auto state = AdamState::for_cloud(3);
    state.first_moment.positions[1].x() = 5.0f;
    state.second_moment.colors[2].y() = 7.0f;
    state.resize(5);
    EXPECT_EQ(state.first_moment.size(), 5u);
    EXPECT_EQ(state.second_moment.size(), 5u);
    EXPECT_EQ(state.first_moment.positions[4], Vec3<float>::Zero());
    const std::vector<std::size_t> keep{2, 1};
    state.gather(keep);
    EXPECT_EQ(state.first_moment.size(), 2u);
    EXPECT_EQ(state.second_moment.colors[0].y(), 7.0f);
    EXPECT_EQ(state.first_moment.positions[1].x(), 5.0f);
    state.reset_entry(1);
    EXPECT_EQ(state.first_moment.positions[1].x(), 0.0f);
}
