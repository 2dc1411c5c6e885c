// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <string>

namespace tilesplat {

/// Pinhole camera with a world-to-camera rigid transform (x right, y down, z forward).
struct Camera {
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    std::string image_name;

    /// Throws DimensionMismatch / NonFiniteParameter for invalid intrinsics or a
    /// non-orthonormal rotation (tolerance 1e-6).
    void validate() const;

    Eigen::Vector3d center() const { return -rotation.transpose() * translation; }

    /// Camera looking from `eye` at `target`, with `up` roughly opposite the image y axis.
    static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                          const Eigen::Vector3d& up, double focal, int width, int height);
};

/// Screen tiling. Tile ids are row-major in [0, tiles_x * tiles_y); partial tiles at the
/// right/bottom border are allowed.
struct TileGrid {
    int tile_size = 16;
    int tiles_x = 0, tiles_y = 0;
    int width = 0, height = 0;

    static TileGrid for_image(int width, int height, int tile_size = 16);
    static TileGrid for_camera(const Camera& camera, int tile_size = 16) {
        return for_image(camera.width, camera.height, tile_size);
    }

    int tile_count() const noexcept { return tiles_x * tiles_y; }
};

} // namespace tilesplat
