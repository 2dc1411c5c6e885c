// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/interval.hpp"

#include "tilesplat/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>

namespace tilesplat {
namespace {

std::optional<double> to_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

double pow10(int d) {
    double p = 1.0;
    for (int i = 0; i < d; ++i) p *= 10.0;
    return p;
}

} // namespace

int decimals_for(MetricKind kind) noexcept {
    switch (kind) {
    case MetricKind::Psnr: return 2;
    case MetricKind::Ssim: return 3;
    case MetricKind::TimeSeconds: return 0;
    case MetricKind::VramGib: return 2;
    case MetricKind::NumGsThousands: return 0;
    }
    return 2;
}

std::string round_metric(double value, MetricKind kind) {
    if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteParameter, "cannot round a non-finite value");
    const int d = decimals_for(kind);
    const double scaled = std::fabs(value) * pow10(d);
    double whole = std::floor(scaled);
    const double frac = scaled - whole;
    // Binary representations of decimal ties (e.g. 25.485) land a hair below .5.
    const double tol = 1e-9 * std::max(1.0, scaled);
    if (frac >= 0.5 - tol) whole += 1.0;
    const auto units = static_cast<std::uint64_t>(whole);

    std::string digits = std::to_string(units);
    if (d > 0) {
        if (digits.size() <= std::size_t(d)) digits.insert(0, std::size_t(d) + 1 - digits.size(), '0');
        digits.insert(digits.size() - std::size_t(d), 1, '.');
    }
    if (value < 0 && units != 0) digits.insert(0, 1, '-');
    return digits;
}

std::string interval_notation(std::string_view lower, std::string_view upper) {
    const auto lo = to_number(lower);
    const auto hi = to_number(upper);
    if (!lo || !hi) throw Error(ErrorCode::InvalidOrder, "bounds are not numbers");
    if (*lo > *hi) {
        throw Error(ErrorCode::InvalidOrder, std::string(lower) + " is above " + std::string(upper));
    }
    if (lower == upper) return std::string(lower);

    const std::size_t limit = std::min(lower.size(), upper.size()) - 1;
    std::size_t p = 0;
    while (p < limit && lower[p] == upper[p]) ++p;

    std::string out(lower.substr(0, p));
    out += '[';
    out += lower.substr(p);
    out += '-';
    out += upper.substr(p);
    out += ']';
    return out;
}

IntervalCell IntervalCell::from_strings(std::string lower, std::string upper) {
    IntervalCell cell;
    cell.rendered = interval_notation(lower, upper);
    cell.lower = std::move(lower);
    cell.upper = std::move(upper);
    return cell;
}

IntervalCell IntervalCell::from_bounds(double lower, double upper, MetricKind kind) {
    return from_strings(round_metric(lower, kind), round_metric(upper, kind));
}

std::optional<IntervalCell> parse_interval(std::string_view rendered) {
    const auto open = rendered.find('[');
    if (open == std::string_view::npos) {
        if (!to_number(rendered)) return std::nullopt;
        return IntervalCell{std::string(rendered), std::string(rendered), std::string(rendered)};
    }
    if (rendered.back() != ']') return std::nullopt;
    const std::string_view prefix = rendered.substr(0, open);
    const std::string_view inner = rendered.substr(open + 1, rendered.size() - open - 2);
    const auto dash = inner.find('-', 1);
    if (dash == std::string_view::npos) return std::nullopt;

    std::string lower(prefix), upper(prefix);
    lower += inner.substr(0, dash);
    upper += inner.substr(dash + 1);
    try {
        auto cell = IntervalCell::from_strings(std::move(lower), std::move(upper));
        if (cell.rendered != rendered) return std::nullopt;
        return cell;
    } catch (const Error&) {
        return std::nullopt;
    }
}

} // namespace tilesplat
