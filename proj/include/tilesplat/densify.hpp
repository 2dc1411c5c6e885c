// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/adam.hpp"
#include "tilesplat/arena.hpp"
#include "tilesplat/gaussian_cloud.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tilesplat {

using Rng = std::mt19937_64;

/// Per-Gaussian running sum of screen-space gradient norms between densification events.
struct DensifyStats {
    std::vector<float> grad_accum;
    std::vector<std::uint32_t> count;

    void resize(std::size_t n);
    void reset();
    /// Adds `norms[i]` for every Gaussian with `touched[i]` set.
    void accumulate(std::span<const float> norms, std::span<const std::uint32_t> touched);
};

struct DefaultDensifyOptions {
    int interval = 100;
    int start = 500;
    /// Last iteration that densifies, as a fraction of the run length.
    double stop_fraction = 0.5;
    double grad_threshold = 2e-4;
    /// Clone below / split at or above this fraction of the scene extent.
    double size_threshold_fraction = 0.01;
    double split_factor = 1.6;
    double prune_opacity = 0.005;
    int opacity_reset_interval = 3000;
    double opacity_reset_value = 0.01;
};

struct DensifyReport {
    bool ran = false;
    std::size_t cloned = 0;
    std::size_t split = 0;
    std::size_t pruned = 0;
    bool opacity_reset = false;
    /// Reallocating resizes triggered in the per-Gaussian buffers.
    std::size_t resize_events = 0;
};

/// Clone/split/prune on the default schedule. `total_iterations` resolves stop_fraction.
/// New Gaussians start with zero Adam moments; stats are cleared after each event.
DensifyReport densify_default(GaussianCloud& cloud, AdamState& state, DensifyStats& stats, int iteration,
                              int total_iterations, const DefaultDensifyOptions& opts, double scene_extent, Rng& rng,
                              GaussianBufferSet* buffers = nullptr);

struct McmcOptions {
    std::size_t budget = 1'000'000;
    int interval = 100;
    int start = 100;
    double stop_fraction = 0.9;
    double dead_opacity = 0.005;
    /// Positional noise multiplier (times the position learning rate).
    double noise_scale = 5e5;
    /// Steepness and center of the opacity gate on the noise.
    double gate_sharpness = 100.0;
    double gate_center = 0.995;
    /// Spread of a relocated Gaussian around its target, in units of the target's scale.
    double relocate_jitter = 0.5;
};

struct McmcReport {
    bool ran = false;
    std::size_t relocated = 0;
};

/// Relocates dead Gaussians onto alive ones sampled proportionally to opacity. The count never
/// changes; throws BudgetViolation if it differs from opts.budget on entry.
McmcReport densify_mcmc(GaussianCloud& cloud, AdamState& state, int iteration, int total_iterations,
                        const McmcOptions& opts, Rng& rng);

/// Draws `n` indices from `candidates` with probability proportional to `weights[candidate]`.
std::vector<std::size_t> sample_relocation_targets(std::span<const float> weights,
                                                   std::span<const std::size_t> candidates, std::size_t n, Rng& rng);

/// Opacity shared by the two halves of a 1 -> 2 relocation: 1 - sqrt(1 - opacity).
double split_opacity(double opacity);

/// Exploration noise applied after each optimizer step, gated towards low-opacity Gaussians.
void mcmc_add_noise(GaussianCloud& cloud, double position_lr, const McmcOptions& opts, Rng& rng);

/// Pads (with dead copies of existing Gaussians) or truncates (lowest opacity first) so the
/// cloud holds exactly `budget` Gaussians.
GaussianCloud fit_to_budget(const GaussianCloud& cloud, std::size_t budget, Rng& rng);

} // namespace tilesplat
