// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/camera.hpp"

#include "tilesplat/error.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace tilesplat {

void Camera::validate() const {
    if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy) ||
        !rotation.allFinite() || !translation.allFinite()) {
        throw Error(ErrorCode::NonFiniteParameter, "camera has non-finite parameters");
    }
    if (fx <= 0.0 || fy <= 0.0) throw Error(ErrorCode::DimensionMismatch, "focal lengths must be positive");
    if (width <= 0 || height <= 0) throw Error(ErrorCode::DimensionMismatch, "image size must be positive");
    const double err = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (err > 1e-6) throw Error(ErrorCode::DimensionMismatch, "camera rotation is not orthonormal");
}

Camera Camera::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up,
                       double focal, int width, int height) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d down = forward.cross(right);

    Camera cam;
    cam.fx = cam.fy = focal;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    cam.width = width;
    cam.height = height;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -cam.rotation * eye;
    return cam;
}

TileGrid TileGrid::for_image(int width, int height, int tile_size) {
    if (tile_size <= 0) throw Error(ErrorCode::ConfigError, "tile size must be positive");
    TileGrid g;
    g.tile_size = tile_size;
    g.width = width;
    g.height = height;
    g.tiles_x = (width + tile_size - 1) / tile_size;
    g.tiles_y = (height + tile_size - 1) / tile_size;
    return g;
}

} // namespace tilesplat
