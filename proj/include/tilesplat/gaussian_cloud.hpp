// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/math.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace tilesplat {

/// Trainable Gaussian model stored as parallel arrays. Scales are stored as logs, opacities and
/// colors as logits; activations are applied where the values are consumed.
///
/// The same layout is reused for gradients and Adam moments so that densification can
/// gather/append all of them with one code path.
template <typename T> struct BasicGaussianCloud {
    std::vector<Vec3<T>> positions;
    std::vector<Vec3<T>> log_scales;
    std::vector<Vec4<T>> rotations; // (w, x, y, z)
    std::vector<T> opacity_logits;
    std::vector<Vec3<T>> colors;

    std::size_t size() const noexcept { return positions.size(); }
    bool empty() const noexcept { return positions.empty(); }

    bool consistent() const noexcept {
        const auto n = positions.size();
        return log_scales.size() == n && rotations.size() == n && opacity_logits.size() == n &&
               colors.size() == n;
    }

    /// Resizes every array; new entries are zero.
    void resize(std::size_t n) {
        positions.resize(n, Vec3<T>::Zero());
        log_scales.resize(n, Vec3<T>::Zero());
        rotations.resize(n, Vec4<T>::Zero());
        opacity_logits.resize(n, T(0));
        colors.resize(n, Vec3<T>::Zero());
    }

    void set_zero() {
        const auto n = size();
        *this = BasicGaussianCloud{};
        resize(n);
    }

    void push_back_from(const BasicGaussianCloud& src, std::size_t i) {
        positions.push_back(src.positions[i]);
        log_scales.push_back(src.log_scales[i]);
        rotations.push_back(src.rotations[i]);
        opacity_logits.push_back(src.opacity_logits[i]);
        colors.push_back(src.colors[i]);
    }

    void copy_entry(std::size_t dst, const BasicGaussianCloud& src, std::size_t i) {
        positions[dst] = src.positions[i];
        log_scales[dst] = src.log_scales[i];
        rotations[dst] = src.rotations[i];
        opacity_logits[dst] = src.opacity_logits[i];
        colors[dst] = src.colors[i];
    }

    BasicGaussianCloud gather(std::span<const std::size_t> indices) const {
        BasicGaussianCloud out;
        out.positions.reserve(indices.size());
        out.log_scales.reserve(indices.size());
        out.rotations.reserve(indices.size());
        out.opacity_logits.reserve(indices.size());
        out.colors.reserve(indices.size());
        for (auto i : indices) out.push_back_from(*this, i);
        return out;
    }

    template <typename U> BasicGaussianCloud<U> cast() const {
        BasicGaussianCloud<U> out;
        out.resize(size());
        for (std::size_t i = 0; i < size(); ++i) {
            out.positions[i] = positions[i].template cast<U>();
            out.log_scales[i] = log_scales[i].template cast<U>();
            out.rotations[i] = rotations[i].template cast<U>();
            out.opacity_logits[i] = static_cast<U>(opacity_logits[i]);
            out.colors[i] = colors[i].template cast<U>();
        }
        return out;
    }

    /// Number of scalar parameters per Gaussian (3 + 3 + 4 + 1 + 3).
    static constexpr std::size_t kScalarsPerGaussian = 14;
};

using GaussianCloud = BasicGaussianCloud<float>;

/// Returns a copy with every quaternion scaled to unit norm.
/// Throws ZeroQuaternion when a quaternion has norm <= 1e-12.
template <typename T> BasicGaussianCloud<T> normalize_rotations(BasicGaussianCloud<T> cloud);

/// Uniform view over the 14 scalars of Gaussian `i`, in field order. Used by gradient
/// checks and by the optimizer so the five groups need not be spelled out everywhere.
template <typename T> T& scalar_at(BasicGaussianCloud<T>& c, std::size_t i, std::size_t k);
template <typename T> const T& scalar_at(const BasicGaussianCloud<T>& c, std::size_t i, std::size_t k);

enum class ParamGroup { Positions, LogScales, Rotations, OpacityLogits, Colors };
ParamGroup param_group_of(std::size_t k) noexcept;

} // namespace tilesplat
