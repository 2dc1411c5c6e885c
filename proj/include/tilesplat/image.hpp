// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/math.hpp"

#include <vector>

namespace tilesplat {

/// Row-major linear-RGB image.
template <typename T> struct BasicImage {
    int width = 0, height = 0;
    std::vector<Vec3<T>> pixels;

    BasicImage() = default;
    BasicImage(int w, int h) : width(w), height(h), pixels(std::size_t(w) * std::size_t(h), Vec3<T>::Zero()) {}

    Vec3<T>& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }
    const Vec3<T>& at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }

    template <typename U> BasicImage<U> cast() const {
        BasicImage<U> out(width, height);
        for (std::size_t i = 0; i < pixels.size(); ++i) out.pixels[i] = pixels[i].template cast<U>();
        return out;
    }
};

using ImageBuffer = BasicImage<float>;

} // namespace tilesplat
