// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/gaussian_cloud.hpp"

#include <cstdint>
#include <span>

namespace tilesplat {

struct LearningRates {
    double positions = 1.6e-4; // multiplied by the scene extent by the trainer
    double log_scales = 5e-3;
    double rotations = 1e-3;
    double opacity_logits = 5e-2;
    double colors = 2.5e-3;

    double for_group(ParamGroup g) const noexcept;
};

struct AdamState {
    GaussianCloud first_moment;
    GaussianCloud second_moment;
    std::int64_t step_count = 0;
    LearningRates lr;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-15;

    static AdamState for_cloud(std::size_t count, const LearningRates& lr = {});

    /// Keeps the moment arrays in lockstep with a cloud of `count` Gaussians; new rows are zero.
    void resize(std::size_t count);
    /// Zeroes both moments of Gaussian `i`.
    void reset_entry(std::size_t i);
    /// Keeps only the rows listed in `keep` (in that order).
    void gather(std::span<const std::size_t> keep);
};

/// One bias-corrected Adam step on every parameter group; rotations are re-normalized after
/// the update. Throws ShapeMismatch when cloud, gradients and moments disagree in length.
void adam_step(GaussianCloud& cloud, const GaussianCloud& grads, AdamState& state);

} // namespace tilesplat
