// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

namespace tilesplat {

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double mean = 0.0;
    double half_width = 0.0;
};

/// Two-sided Student-t quantile t_{(1+level)/2, dof}.
double student_t_quantile(double level, int dof);

/// mean -/+ t * s / sqrt(n). Throws TooFewSamples for n < 2 and NonFiniteParameter for
/// non-finite samples.
ConfidenceInterval mean_ci(std::span<const double> samples, double level = 0.90);

} // namespace tilesplat
