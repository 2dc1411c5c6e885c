// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/densify.hpp"

#include "tilesplat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tilesplat {
namespace {

int last_iteration(double fraction, int total_iterations) {
    return static_cast<int>(std::floor(fraction * total_iterations));
}

bool on_schedule(int iteration, int interval, int start, int stop) {
    return interval > 0 && iteration >= start && iteration <= stop && iteration % interval == 0;
}

void append_zero_moments(AdamState& state, std::size_t count) { state.resize(count); }

} // namespace

void DensifyStats::resize(std::size_t n) {
    grad_accum.assign(n, 0.0f);
    count.assign(n, 0u);
}

void DensifyStats::reset() { resize(grad_accum.size()); }

void DensifyStats::accumulate(std::span<const float> norms, std::span<const std::uint32_t> touched) {
    if (norms.size() != grad_accum.size() || touched.size() != grad_accum.size()) {
        throw Error(ErrorCode::ShapeMismatch, "densify stats do not match the cloud");
    }
    for (std::size_t i = 0; i < norms.size(); ++i) {
        if (touched[i] == 0) continue;
        grad_accum[i] += norms[i];
        ++count[i];
    }
}

DensifyReport densify_default(GaussianCloud& cloud, AdamState& state, DensifyStats& stats, int iteration,
                              int total_iterations, const DefaultDensifyOptions& opts, double scene_extent, Rng& rng,
                              GaussianBufferSet* buffers) {
    DensifyReport report;
    const int stop = last_iteration(opts.stop_fraction, total_iterations);
    const bool densify_now = on_schedule(iteration, opts.interval, opts.start, stop);
    const bool reset_now = opts.opacity_reset_interval > 0 && iteration > 0 && iteration <= stop &&
                           iteration % opts.opacity_reset_interval == 0;
    if (!densify_now && !reset_now) return report;
    if (stats.grad_accum.size() != cloud.size() || state.first_moment.size() != cloud.size()) {
        throw Error(ErrorCode::ShapeMismatch, "densify inputs differ in length");
    }

    if (densify_now) {
        report.ran = true;
        const std::size_t n = cloud.size();
        const double size_threshold = opts.size_threshold_fraction * scene_extent;
        const float log_split = static_cast<float>(std::log(opts.split_factor));
        std::normal_distribution<float> normal(0.0f, 1.0f);

        std::vector<std::size_t> split_parents;
        for (std::size_t i = 0; i < n; ++i) {
            if (stats.count[i] == 0) continue;
            const double mean_grad = double(stats.grad_accum[i]) / stats.count[i];
            if (!(mean_grad > opts.grad_threshold)) continue;
            const double max_scale = std::exp(double(cloud.log_scales[i].maxCoeff()));
            if (max_scale < size_threshold) {
                cloud.push_back_from(cloud, i);
                ++report.cloned;
            } else {
                split_parents.push_back(i);
            }
        }

        // Each split parent is replaced by two children drawn from its own distribution.
        std::vector<char> remove(cloud.size() + 2 * split_parents.size(), 0);
        for (auto i : split_parents) {
            const Vec4<float> q = cloud.rotations[i].normalized();
            const Mat3<float> rot = quat_to_rotation(q);
            const Vec3<float> scale = cloud.log_scales[i].array().exp().matrix();
            for (int child = 0; child < 2; ++child) {
                const Vec3<float> offset = rot * scale.cwiseProduct(Vec3<float>(normal(rng), normal(rng), normal(rng)));
                cloud.push_back_from(cloud, i);
                cloud.positions.back() += offset;
                cloud.log_scales.back().array() -= log_split;
            }
            remove[i] = 1;
            ++report.split;
        }

        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (!remove[i] && sigmoid(cloud.opacity_logits[i]) < opts.prune_opacity) {
                remove[i] = 1;
                ++report.pruned;
            }
        }

        append_zero_moments(state, cloud.size());
        std::vector<std::size_t> keep;
        keep.reserve(cloud.size());
        for (std::size_t i = 0; i < cloud.size(); ++i)
            if (!remove[i]) keep.push_back(i);
        if (keep.size() != cloud.size()) {
            cloud = cloud.gather(keep);
            state.gather(keep);
        }
        stats.resize(cloud.size());
    }

    if (reset_now) {
        const float cap = logit(static_cast<float>(opts.opacity_reset_value));
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (cloud.opacity_logits[i] > cap) {
                cloud.opacity_logits[i] = cap;
                scalar_at(state.first_moment, i, 10) = 0.0f;
                scalar_at(state.second_moment, i, 10) = 0.0f;
            }
        }
        report.opacity_reset = true;
    }

    if (buffers) report.resize_events = buffers->sync(cloud.size());
    return report;
}

double split_opacity(double opacity) { return 1.0 - std::sqrt(std::max(0.0, 1.0 - opacity)); }

std::vector<std::size_t> sample_relocation_targets(std::span<const float> weights,
                                                   std::span<const std::size_t> candidates, std::size_t n, Rng& rng) {
    std::vector<std::size_t> out;
    if (candidates.empty() || n == 0) return out;
    std::vector<double> w;
    w.reserve(candidates.size());
    for (auto c : candidates) w.push_back(std::max(0.0, double(weights[c])));
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(candidates[pick(rng)]);
    return out;
}

McmcReport densify_mcmc(GaussianCloud& cloud, AdamState& state, int iteration, int total_iterations,
                        const McmcOptions& opts, Rng& rng) {
    if (cloud.size() != opts.budget) {
        throw Error(ErrorCode::BudgetViolation, "cloud holds " + std::to_string(cloud.size()) + " Gaussians, budget is " +
                                                    std::to_string(opts.budget));
    }
    McmcReport report;
    const int stop = last_iteration(opts.stop_fraction, total_iterations);
    if (!on_schedule(iteration, opts.interval, opts.start, stop)) return report;
    report.ran = true;

    std::vector<float> opacity(cloud.size());
    std::vector<std::size_t> dead, alive;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        opacity[i] = sigmoid(cloud.opacity_logits[i]);
        (opacity[i] < opts.dead_opacity ? dead : alive).push_back(i);
    }
    if (dead.empty() || alive.empty()) return report;

    const auto targets = sample_relocation_targets(opacity, alive, dead.size(), rng);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (std::size_t k = 0; k < dead.size(); ++k) {
        const std::size_t d = dead[k], t = targets[k];
        const float shared = static_cast<float>(split_opacity(sigmoid(double(cloud.opacity_logits[t]))));
        const float shared_logit = logit(std::clamp(shared, 1e-6f, 1.0f - 1e-6f));
        cloud.opacity_logits[t] = shared_logit;
        cloud.copy_entry(d, cloud, t);

        const Vec4<float> q = cloud.rotations[t].normalized();
        const Vec3<float> scale = cloud.log_scales[t].array().exp().matrix();
        const Vec3<float> jitter(normal(rng), normal(rng), normal(rng));
        cloud.positions[d] += quat_to_rotation(q) * scale.cwiseProduct(jitter) * float(opts.relocate_jitter);

        state.reset_entry(d);
        state.reset_entry(t);
        ++report.relocated;
    }
    return report;
}

void mcmc_add_noise(GaussianCloud& cloud, double position_lr, const McmcOptions& opts, Rng& rng) {
    if (opts.noise_scale == 0.0) return;
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double o = sigmoid(double(cloud.opacity_logits[i]));
        const double gate = 1.0 / (1.0 + std::exp(-opts.gate_sharpness * (1.0 - o - opts.gate_center)));
        const Vec3<float> n(normal(rng), normal(rng), normal(rng));
        const Vec4<float> q = cloud.rotations[i].normalized();
        const Vec3<float> scale = cloud.log_scales[i].array().exp().matrix();
        const Vec3<float> step = quat_to_rotation(q) * scale.cwiseProduct(n);
        cloud.positions[i] += step * float(position_lr * opts.noise_scale * gate);
    }
}

GaussianCloud fit_to_budget(const GaussianCloud& cloud, std::size_t budget, Rng& rng) {
    if (cloud.size() == budget) return cloud;
    if (cloud.empty()) throw Error(ErrorCode::BudgetViolation, "cannot fill a budget from an empty cloud");
    if (cloud.size() > budget) {
        std::vector<std::size_t> order(cloud.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return cloud.opacity_logits[a] > cloud.opacity_logits[b];
        });
        order.resize(budget);
        std::sort(order.begin(), order.end());
        return cloud.gather(order);
    }
    GaussianCloud out = cloud;
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
    const float dead_logit = logit(0.001f);
    while (out.size() < budget) {
        out.push_back_from(cloud, pick(rng));
        out.opacity_logits.back() = dead_logit;
    }
    return out;
}

} // namespace tilesplat
