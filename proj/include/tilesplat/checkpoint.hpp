// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/gaussian_cloud.hpp"

#include <filesystem>
#include <iosfwd>

namespace tilesplat {

// Layout: "SPLT", u32 version (1), u64 count, then positions, log_scales, rotations,
// opacity_logits, colors as little-endian float32, each array contiguous.
inline constexpr char kCheckpointMagic[4] = {'S', 'P', 'L', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const GaussianCloud& cloud);
GaussianCloud read_checkpoint(std::istream& in);

void save_checkpoint(const GaussianCloud& cloud, const std::filesystem::path& path);
GaussianCloud load_checkpoint(const std::filesystem::path& path);

} // namespace tilesplat
