// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/adam.hpp"
#include "tilesplat/densify.hpp"
#include "tilesplat/scene_io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace tilesplat {

enum class DensifyMode { None, Default, Mcmc };

std::string_view densify_mode_name(DensifyMode mode) noexcept;
/// Accepts "none", "default", "mcmc". Throws ConfigError otherwise.
DensifyMode parse_densify_mode(std::string_view name);

struct MembenchOptions {
    double growth_factor = 1.5;
    double copy_window_seconds = 1e-3;
    /// Gaussian capacity reserved by --preallocate in default mode; 0 means four times the
    /// initial count. MCMC always reserves its budget.
    std::size_t max_gaussians = 0;
};

struct RunConfig {
    std::filesystem::path scene; // empty: synthetic scene
    std::filesystem::path out = "out";
    int iterations = 500;
    std::uint64_t seed = 0;
    int repeats = 1;
    int threads = 1;
    int tile_size = 16;
    int downscale = 1;
    std::size_t random_points = 1000;
    double lambda_dssim = 0.2;
    bool preallocate = false;
    DensifyMode densify = DensifyMode::Default;

    LearningRates lr;
    /// Position learning rate at the last iteration, as a fraction of the initial one.
    double position_lr_final_factor = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-15;

    DefaultDensifyOptions densify_default;
    McmcOptions mcmc;
    MembenchOptions membench;
    SyntheticOptions synthetic;

    /// Throws ConfigError when a field is out of range.
    void validate() const;
};

/// Applies `key = value` lines grouped in sections [train], [pipeline], [optimizer],
/// [densify.default], [densify.mcmc], [membench], [synthetic] on top of `base`.
/// Unknown sections or keys and unparsable values throw ConfigError.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Every key with its current value, in a form parse_config reads back.
std::string config_to_text(const RunConfig& config);

} // namespace tilesplat
