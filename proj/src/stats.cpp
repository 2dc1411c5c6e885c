// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/stats.hpp"

#include "tilesplat/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace tilesplat {

double student_t_quantile(double level, int dof) {
    if (dof < 1) throw Error(ErrorCode::TooFewSamples, "t quantile needs at least one degree of freedom");
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, 0.5 * (1.0 + level));
}

ConfidenceInterval mean_ci(std::span<const double> samples, double level) {
    const std::size_t n = samples.size();
    if (n < 2) throw Error(ErrorCode::TooFewSamples, "need at least 2 samples, got " + std::to_string(n));
    double sum = 0.0;
    for (double s : samples) {
        if (!std::isfinite(s)) throw Error(ErrorCode::NonFiniteParameter, "non-finite sample");
        sum += s;
    }
    const double mean = sum / double(n);
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / double(n - 1));
    ConfidenceInterval ci;
    ci.mean = mean;
    ci.half_width = sd == 0.0 ? 0.0 : student_t_quantile(level, int(n - 1)) * sd / std::sqrt(double(n));
    ci.lower = mean - ci.half_width;
    ci.upper = mean + ci.half_width;
    return ci;
}

} // namespace tilesplat
