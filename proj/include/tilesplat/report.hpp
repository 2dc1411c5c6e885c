// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/interval.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tilesplat {

/// One measurement from one benchmark run.
struct ResultRow {
    int run_id = 0;
    std::string scene;
    std::string metric;
    double value = 0.0;
};

/// Metric names used in results CSVs, in table row order.
inline constexpr std::array<std::string_view, 6> kResultMetrics = {
    "psnr", "ssim", "time_seconds", "total_vram_gib", "peak_vram_gib", "num_gs_thousands"};

std::string_view metric_row_label(std::string_view metric);
MetricKind metric_kind(std::string_view metric);

/// CSV with header run_id,scene,metric,value. Values are written with 17 significant digits.
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws FormatError on malformed lines.
std::vector<ResultRow> read_results_csv(std::istream& in);

struct ResultsTable {
    std::vector<std::string> columns;       // scenes in first-seen order, then "Average"
    std::vector<std::string> metrics;       // present metrics in table row order
    std::vector<std::vector<IntervalCell>> cells; // [metric][column]
};

/// Reduces repeated runs to interval cells. Every metric that appears must be present for every
/// (run, scene) pair, otherwise IncompleteGrid. A single run gives plain-number cells when
/// `allow_single_run` is set and TooFewSamples otherwise. The Average column is the CI of the
/// per-run mean across scenes.
ResultsTable build_results_table(const std::vector<ResultRow>& rows, double level = 0.90,
                                 bool allow_single_run = true);

std::string render_results_table(const ResultsTable& table);

/// {"columns": [...], "rows": {metric: {column: {"lower", "upper", "rendered"}}}}
std::string results_bounds_json(const ResultsTable& table);

} // namespace tilesplat
