// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/stage_clock.hpp"

#include "tilesplat/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace tilesplat {
namespace {

constexpr std::array<std::string_view, kStageCount> kLabels = {
    "Projection Forward",  "Index Offset",          "Generate Keys",        "Sorting",
    "Tile Ranges",         "Rasterization Forward", "Copy Image to Device", "Loss Gradient",
    "Rasterization Backward", "Proj Bwd + Optimizer", "Densification",
};

constexpr Micros kResolution{1};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    return out;
}

} // namespace

Micros from_seconds(double seconds) { return Micros(std::llround(seconds * 1e6)); }

std::string_view stage_label(StageId id) noexcept { return kLabels[static_cast<std::size_t>(id)]; }

bool stage_from_label(std::string_view label, StageId& out) noexcept {
    for (std::size_t i = 0; i < kStageCount; ++i) {
        if (kLabels[i] == label) {
            out = kAllStages[i];
            return true;
        }
    }
    return false;
}

Micros StageBreakdown::stage_sum() const { return std::accumulate(stages.begin(), stages.end(), Micros{0}); }

StageClock::Scope::Scope(StageClock& owner, StageId stage) : owner_(owner), stage_(stage) {
    if (owner_.open_) throw Error(ErrorCode::NestedStage, std::string(stage_label(stage)) + " opened inside another stage");
    owner_.open_ = true;
    start_ = owner_.clock_->now();
}

StageClock::Scope::~Scope() {
    const auto i = static_cast<std::size_t>(stage_);
    owner_.buckets_[i] += owner_.clock_->now() - start_;
    ++owner_.entries_[i];
    owner_.open_ = false;
}

StageBreakdown StageClock::finalize(Micros total) const { return finalize_breakdown(buckets_, total); }

StageBreakdown finalize_breakdown(const std::array<Micros, kStageCount>& stages, Micros total) {
    StageBreakdown b;
    b.stages = stages;
    b.total = total;
    const auto sum = b.stage_sum();
    if (total + kResolution < sum) {
        throw Error(ErrorCode::NegativeUnaccounted,
                    fmt::format("total {:.6f}s is below the stage sum {:.6f}s", to_seconds(total), to_seconds(sum)));
    }
    b.unaccounted = std::max(Micros{0}, total - sum);
    return b;
}

std::vector<GroupedRow> group_rows(const StageBreakdown& b) {
    using S = StageId;
    return {
        {"Projection Forward", b[S::ProjectionForward]},
        {"Tiling/Sorting", b[S::IndexOffset] + b[S::GenerateKeys] + b[S::Sorting] + b[S::TileRanges]},
        {"Rasterization Forward", b[S::RasterizationForward]},
        {"Loss", b[S::CopyImageToDevice] + b[S::LossGradient]},
        {"Rasterization Backward", b[S::RasterizationBackward]},
        {"Proj Bwd + Optimizer", b[S::ProjBwdOptimizer]},
        {"Densification", b[S::Densification]},
        {"Unaccounted", b.unaccounted},
    };
}

std::string render_breakdown_table(const BreakdownTable& table, bool grouped, int decimals) {
    std::vector<std::pair<std::string, std::vector<Micros>>> rows;
    if (grouped) {
        for (std::size_t r = 0; r < 8; ++r) {
            std::vector<Micros> vals;
            std::string label;
            for (const auto& b : table.values) {
                const auto g = group_rows(b);
                label = g[r].label;
                vals.push_back(g[r].seconds);
            }
            if (table.values.empty()) label = group_rows(StageBreakdown{})[r].label;
            rows.emplace_back(label, vals);
        }
    } else {
        for (auto s : kAllStages) {
            std::vector<Micros> vals;
            for (const auto& b : table.values) vals.push_back(b[s]);
            rows.emplace_back(std::string(stage_label(s)), vals);
        }
        std::vector<Micros> un;
        for (const auto& b : table.values) un.push_back(b.unaccounted);
        rows.emplace_back("Unaccounted", un);
    }
    std::vector<Micros> totals;
    for (const auto& b : table.values) totals.push_back(b.total);

    std::size_t label_w = 24;
    for (const auto& [label, _] : rows) label_w = std::max(label_w, label.size() + 2);
    std::size_t col_w = 10;
    for (const auto& c : table.columns) col_w = std::max(col_w, c.size() + 2);

    std::string out = fmt::format("{:<{}}", "", label_w);
    for (const auto& c : table.columns) out += fmt::format("{:>{}}", c, col_w);
    out += '\n';
    const std::string rule(label_w + col_w * table.columns.size(), '-');
    for (const auto& [label, vals] : rows) {
        out += fmt::format("{:<{}}", label, label_w);
        for (auto v : vals) out += fmt::format("{:>{}.{}f}", to_seconds(v), col_w, decimals);
        out += '\n';
    }
    out += rule + '\n';
    out += fmt::format("{:<{}}", "Total", label_w);
    for (auto v : totals) out += fmt::format("{:>{}.{}f}", to_seconds(v), col_w, decimals);
    out += '\n';
    return out;
}

void write_breakdown_csv(std::ostream& out, const BreakdownTable& table) {
    out << "stage";
    for (const auto& c : table.columns) out << ',' << c;
    out << '\n';
    auto row = [&](std::string_view label, auto&& get) {
        out << label;
        for (const auto& b : table.values) out << ',' << fmt::format("{:.6f}", to_seconds(get(b)));
        out << '\n';
    };
    for (auto s : kAllStages) row(stage_label(s), [s](const StageBreakdown& b) { return b[s]; });
    row("Unaccounted", [](const StageBreakdown& b) { return b.unaccounted; });
    row("Total", [](const StageBreakdown& b) { return b.total; });
}

BreakdownTable read_breakdown_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::FormatError, "empty breakdown CSV");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "stage") throw Error(ErrorCode::FormatError, "breakdown CSV header must start with 'stage'");

    BreakdownTable table;
    table.columns.assign(header.begin() + 1, header.end());
    const std::size_t ncol = table.columns.size();
    std::vector<std::array<Micros, kStageCount>> stages(ncol);
    std::vector<std::array<bool, kStageCount>> seen(ncol);
    std::vector<Micros> totals(ncol);
    bool have_total = false;

    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != ncol + 1) throw Error(ErrorCode::FormatError, "ragged breakdown row: " + line);
        std::vector<Micros> vals;
        for (std::size_t c = 0; c < ncol; ++c) {
            try {
                vals.push_back(from_seconds(std::stod(fields[c + 1])));
            } catch (const std::exception&) {
                throw Error(ErrorCode::FormatError, "bad number in breakdown row: " + line);
            }
        }
        StageId id;
        if (stage_from_label(fields[0], id)) {
            for (std::size_t c = 0; c < ncol; ++c) {
                stages[c][static_cast<std::size_t>(id)] = vals[c];
                seen[c][static_cast<std::size_t>(id)] = true;
            }
        } else if (fields[0] == "Total") {
            totals = vals;
            have_total = true;
        } else if (fields[0] != "Unaccounted") {
            throw Error(ErrorCode::FormatError, "unknown stage label '" + fields[0] + "'");
        }
    }
    if (!have_total) throw Error(ErrorCode::IncompleteGrid, "breakdown CSV has no Total row");
    for (std::size_t c = 0; c < ncol; ++c) {
        if (std::find(seen[c].begin(), seen[c].end(), false) != seen[c].end()) {
            throw Error(ErrorCode::IncompleteGrid, "breakdown CSV is missing stage rows");
        }
        table.values.push_back(finalize_breakdown(stages[c], totals[c]));
    }
    return table;
}

} // namespace tilesplat
