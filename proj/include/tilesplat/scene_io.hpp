// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/camera.hpp"
#include "tilesplat/gaussian_cloud.hpp"
#include "tilesplat/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tilesplat {

struct SceneBundle {
    std::string name;
    std::vector<Camera> cameras;
    std::vector<ImageBuffer> targets; // paired with cameras
    GaussianCloud initial;
    double extent = 1.0; // max distance from a camera center to the camera centroid
};

/// 8-bit RGB(A) PNG decoded to linear [0,1] by dividing by 255. Throws MissingFile / IoError.
ImageBuffer read_png(const std::filesystem::path& path);
/// Channels stored as round(clamp(c, 0, 1) * 255). Throws IoError.
void write_png(const std::filesystem::path& path, const ImageBuffer& image);

/// Mean over each factor x factor block; trailing rows/columns that do not fill a block are dropped.
ImageBuffer box_downsample(const ImageBuffer& image, int factor);
/// Divides fx, fy, cx, cy, width and height by `factor`.
Camera downscale_camera(Camera camera, int factor);

double camera_extent(const std::vector<Camera>& cameras);

struct LoadOptions {
    int downscale = 1;
    std::uint64_t seed = 0;
    /// Gaussians drawn uniformly inside the box spanned by the camera centers when the scene has
    /// no initial.splt checkpoint.
    std::size_t random_points = 1000;
};

/// Reads `dir/cameras.json` and `dir/images/*.png`; starts from `dir/initial.splt` when present.
/// Throws MissingFile, BadJson, or DimensionMismatch.
SceneBundle load_scene(const std::filesystem::path& dir, const LoadOptions& opts = {});

/// Inverse of load_scene for the camera/image part (used to build on-disk fixtures).
void save_scene(const std::filesystem::path& dir, const SceneBundle& scene);

struct SyntheticOptions {
    std::uint64_t seed = 0;
    std::size_t gaussians = 64;
    std::size_t cameras = 3;
    int width = 64;
    int height = 64;
    /// Standard deviation of the initial-position perturbation, as a fraction of the extent.
    double position_noise = 0.05;
    /// Standard deviation of the initial-color perturbation (activated color units).
    double color_noise = 0.1;
    double ring_radius = 3.0;
    double ring_height = 1.0;
    /// Seed of the initial-cloud perturbation; defaults to `seed`. Repeated benchmark runs vary
    /// only this so that every run fits the same reference scene.
    std::optional<std::uint64_t> perturbation_seed;
};

/// Random reference cloud viewed by cameras on a ring around its centroid; targets are rendered
/// with the pipeline's own forward pass and the initial cloud is a perturbed copy of the
/// reference. Pure function of the options.
SceneBundle generate_synthetic(const SyntheticOptions& opts);

/// The unperturbed reference cloud generate_synthetic renders its targets from.
GaussianCloud synthetic_reference(const SyntheticOptions& opts);

} // namespace tilesplat
