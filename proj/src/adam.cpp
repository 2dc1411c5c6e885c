// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/adam.hpp"

#include "tilesplat/error.hpp"

#include <cmath>

namespace tilesplat {

double LearningRates::for_group(ParamGroup g) const noexcept {
    switch (g) {
    case ParamGroup::Positions: return positions;
    case ParamGroup::LogScales: return log_scales;
    case ParamGroup::Rotations: return rotations;
    case ParamGroup::OpacityLogits: return opacity_logits;
    case ParamGroup::Colors: return colors;
    }
    return 0.0;
}

AdamState AdamState::for_cloud(std::size_t count, const LearningRates& lr) {
    AdamState s;
    s.lr = lr;
    s.resize(count);
    return s;
}

void AdamState::resize(std::size_t count) {
    first_moment.resize(count);
    second_moment.resize(count);
}

void AdamState::reset_entry(std::size_t i) {
    for (std::size_t k = 0; k < GaussianCloud::kScalarsPerGaussian; ++k) {
        scalar_at(first_moment, i, k) = 0.0f;
        scalar_at(second_moment, i, k) = 0.0f;
    }
}

void AdamState::gather(std::span<const std::size_t> keep) {
    first_moment = first_moment.gather(keep);
    second_moment = second_moment.gather(keep);
}

void adam_step(GaussianCloud& cloud, const GaussianCloud& grads, AdamState& state) {
    const std::size_t n = cloud.size();
    if (!cloud.consistent() || !grads.consistent() || grads.size() != n || state.first_moment.size() != n ||
        state.second_moment.size() != n) {
        throw Error(ErrorCode::ShapeMismatch, "cloud, gradients and Adam moments differ in length");
    }
    ++state.step_count;
    const double b1 = state.beta1, b2 = state.beta2;
    const double correction1 = 1.0 - std::pow(b1, double(state.step_count));
    const double correction2 = 1.0 - std::pow(b2, double(state.step_count));

    for (std::size_t k = 0; k < GaussianCloud::kScalarsPerGaussian; ++k) {
        const double lr = state.lr.for_group(param_group_of(k));
        for (std::size_t i = 0; i < n; ++i) {
            const double g = scalar_at(grads, i, k);
            float& m = scalar_at(state.first_moment, i, k);
            float& v = scalar_at(state.second_moment, i, k);
            m = float(b1 * m + (1.0 - b1) * g);
            v = float(b2 * v + (1.0 - b2) * g * g);
            const double m_hat = m / correction1;
            const double v_hat = v / correction2;
            scalar_at(cloud, i, k) -= float(lr * m_hat / (std::sqrt(v_hat) + state.eps));
        }
    }
    for (auto& q : cloud.rotations) {
        const float norm = q.norm();
        if (norm > 1e-12f) q /= norm;
    }
}

} // namespace tilesplat
