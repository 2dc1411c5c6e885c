// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/report.hpp"

#include "tilesplat/error.hpp"
#include "tilesplat/stats.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

namespace tilesplat {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

IntervalCell make_cell(const std::vector<double>& samples, MetricKind kind, double level) {
    if (samples.size() == 1) return IntervalCell::from_bounds(samples[0], samples[0], kind);
    const auto ci = mean_ci(samples, level);
    return IntervalCell::from_bounds(ci.lower, ci.upper, kind);
}

} // namespace

std::string_view metric_row_label(std::string_view metric) {
    if (metric == "psnr") return "PSNR";
    if (metric == "ssim") return "SSIM";
    if (metric == "time_seconds") return "Time";
    if (metric == "total_vram_gib") return "Total VRAM";
    if (metric == "peak_vram_gib") return "Peak VRAM";
    if (metric == "num_gs_thousands") return "NumGS";
    throw Error(ErrorCode::FormatError, "unknown metric '" + std::string(metric) + "'");
}

MetricKind metric_kind(std::string_view metric) {
    if (metric == "psnr") return MetricKind::Psnr;
    if (metric == "ssim") return MetricKind::Ssim;
    if (metric == "time_seconds") return MetricKind::TimeSeconds;
    if (metric == "total_vram_gib" || metric == "peak_vram_gib") return MetricKind::VramGib;
    if (metric == "num_gs_thousands") return MetricKind::NumGsThousands;
    throw Error(ErrorCode::FormatError, "unknown metric '" + std::string(metric) + "'");
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << "run_id,scene,metric,value\n";
    for (const auto& r : rows) out << fmt::format("{},{},{},{:.17g}\n", r.run_id, r.scene, r.metric, r.value);
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::vector<ResultRow> rows;
    std::string line;
    if (!std::getline(in, line) || line.rfind("run_id,scene,metric,value", 0) != 0) {
        throw Error(ErrorCode::FormatError, "results CSV must start with run_id,scene,metric,value");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 4) throw Error(ErrorCode::FormatError, fmt::format("line {}: expected 4 fields", line_no));
        ResultRow r;
        try {
            std::size_t used = 0;
            r.run_id = std::stoi(f[0], &used);
            if (used != f[0].size()) throw std::invalid_argument("run_id");
            r.value = std::stod(f[3], &used);
            if (used != f[3].size()) throw std::invalid_argument("value");
        } catch (const std::exception&) {
            throw Error(ErrorCode::FormatError, fmt::format("line {}: bad number", line_no));
        }
        r.scene = f[1];
        r.metric = f[2];
        metric_kind(r.metric);
        rows.push_back(std::move(r));
    }
    return rows;
}

ResultsTable build_results_table(const std::vector<ResultRow>& rows, double level, bool allow_single_run) {
    if (rows.empty()) throw Error(ErrorCode::IncompleteGrid, "no results");
    std::vector<std::string> scenes;
    std::set<int> runs;
    std::set<std::string> present;
    std::map<std::tuple<int, std::string, std::string>, double> values;
    for (const auto& r : rows) {
        if (std::find(scenes.begin(), scenes.end(), r.scene) == scenes.end()) scenes.push_back(r.scene);
        runs.insert(r.run_id);
        present.insert(r.metric);
        metric_kind(r.metric);
        if (!values.emplace(std::make_tuple(r.run_id, r.scene, r.metric), r.value).second) {
            throw Error(ErrorCode::IncompleteGrid,
                        fmt::format("duplicate value for run {}, {}, {}", r.run_id, r.scene, r.metric));
        }
    }
    if (runs.size() < 2 && !allow_single_run) {
        throw Error(ErrorCode::TooFewSamples, "confidence intervals need at least 2 runs");
    }

    ResultsTable table;
    table.columns = scenes;
    table.columns.push_back("Average");
    for (auto m : kResultMetrics) {
        if (!present.count(std::string(m))) continue;
        const std::string metric(m);
        const MetricKind kind = metric_kind(metric);
        std::vector<IntervalCell> row;
        std::vector<double> per_run_mean(runs.size(), 0.0);
        for (const auto& scene : scenes) {
            std::vector<double> samples;
            std::size_t k = 0;
            for (int run : runs) {
                const auto it = values.find({run, scene, metric});
                if (it == values.end()) {
                    throw Error(ErrorCode::IncompleteGrid,
                                fmt::format("missing {} for run {} on {}", metric, run, scene));
                }
                samples.push_back(it->second);
                per_run_mean[k++] += it->second / double(scenes.size());
            }
            row.push_back(make_cell(samples, kind, level));
        }
        row.push_back(make_cell(per_run_mean, kind, level));
        table.metrics.push_back(metric);
        table.cells.push_back(std::move(row));
    }
    return table;
}

std::string render_results_table(const ResultsTable& table) {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{""};
    header.insert(header.end(), table.columns.begin(), table.columns.end());
    grid.push_back(header);
    for (std::size_t m = 0; m < table.metrics.size(); ++m) {
        std::vector<std::string> line{std::string(metric_row_label(table.metrics[m]))};
        for (const auto& cell : table.cells[m]) line.push_back(cell.rendered);
        grid.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : grid)
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());

    std::string out;
    for (const auto& line : grid) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            out += c == 0 ? fmt::format("{:<{}}", line[c], width[c]) : fmt::format(" | {:<{}}", line[c], width[c]);
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

std::string results_bounds_json(const ResultsTable& table) {
    nlohmann::ordered_json j;
    j["columns"] = table.columns;
    auto& rows = j["rows"];
    rows = nlohmann::ordered_json::object();
    for (std::size_t m = 0; m < table.metrics.size(); ++m) {
        auto& row = rows[table.metrics[m]];
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            const auto& cell = table.cells[m][c];
            row[table.columns[c]] = {{"lower", cell.lower}, {"upper", cell.upper}, {"rendered", cell.rendered}};
        }
    }
    return j.dump(2) + "\n";
}

} // namespace tilesplat
