// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/gaussian_cloud.hpp"

#include "tilesplat/error.hpp"

#include <string>

namespace tilesplat {

template <typename T> BasicGaussianCloud<T> normalize_rotations(BasicGaussianCloud<T> cloud) {
    for (std::size_t i = 0; i < cloud.rotations.size(); ++i) {
        auto& q = cloud.rotations[i];
        const T norm = q.norm();
        if (!(norm > T(1e-12))) {
            throw Error(ErrorCode::ZeroQuaternion, "rotation " + std::to_string(i) + " has norm <= 1e-12");
        }
        q /= norm;
    }
    return cloud;
}

template <typename T> T& scalar_at(BasicGaussianCloud<T>& c, std::size_t i, std::size_t k) {
    if (k < 3) return c.positions[i][k];
    if (k < 6) return c.log_scales[i][k - 3];
    if (k < 10) return c.rotations[i][k - 6];
    if (k == 10) return c.opacity_logits[i];
    return c.colors[i][k - 11];
}

template <typename T> const T& scalar_at(const BasicGaussianCloud<T>& c, std::size_t i, std::size_t k) {
    return scalar_at(const_cast<BasicGaussianCloud<T>&>(c), i, k);
}

ParamGroup param_group_of(std::size_t k) noexcept {
    if (k < 3) return ParamGroup::Positions;
    if (k < 6) return ParamGroup::LogScales;
    if (k < 10) return ParamGroup::Rotations;
    if (k == 10) return ParamGroup::OpacityLogits;
    return ParamGroup::Colors;
}

template BasicGaussianCloud<float> normalize_rotations(BasicGaussianCloud<float>);
template BasicGaussianCloud<double> normalize_rotations(BasicGaussianCloud<double>);
template float& scalar_at(BasicGaussianCloud<float>&, std::size_t, std::size_t);
template double& scalar_at(BasicGaussianCloud<double>&, std::size_t, std::size_t);
template const float& scalar_at(const BasicGaussianCloud<float>&, std::size_t, std::size_t);
template const double& scalar_at(const BasicGaussianCloud<double>&, std::size_t, std::size_t);

} // namespace tilesplat
