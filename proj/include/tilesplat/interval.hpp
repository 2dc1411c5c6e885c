// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tilesplat {

enum class MetricKind { Psnr, Ssim, TimeSeconds, VramGib, NumGsThousands };

int decimals_for(MetricKind kind) noexcept;

/// Fixed-point string with the kind's number of decimals, rounding half away from zero.
std::string round_metric(double value, MetricKind kind);

/// Shares the common prefix of the two bounds: ("25.48", "25.54") -> "25.[48-54]".
/// Equal bounds render as the plain string. Throws InvalidOrder when lower > upper.
std::string interval_notation(std::string_view lower, std::string_view upper);

struct IntervalCell {
    std::string lower;
    std::string upper;
    std::string rendered;

    static IntervalCell from_bounds(double lower, double upper, MetricKind kind);
    static IntervalCell from_strings(std::string lower, std::string upper);
    bool operator==(const IntervalCell&) const = default;
};

/// Inverse of interval_notation. Returns nullopt for strings it could not have produced.
std::optional<IntervalCell> parse_interval(std::string_view rendered);

} // namespace tilesplat
