// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/error.hpp"
#include "tilesplat/report.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace tilesplat;

namespace {

std::vector<ResultRow> grid(int runs, const std::vector<std::string>& scenes) {
    std::vector<ResultRow> rows;
    for (int r = 0; r < runs; ++r) {
        for (std::size_t s = 0; s < scenes.size(); ++s) {
            rows.push_back({r, scenes[s], "psnr", 25.0 + double(s) + 0.1 * r});
            rows.push_back({r, scenes[s], "num_gs_thousands", 1000.0 + 10.0 * r});
        }
    }
    return rows;
}

template <typename F> void expect_code(ErrorCode code, F&& f) {
    try {
        f();
        ADD_FAILURE() << "expected " << error_name(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code);
    }
}

} // namespace

TEST(ResultsCsv, RoundTripIsExact) {
    const std::vector<ResultRow> rows{{0, "a", "psnr", 25.123456789012345}, {1, "b", "ssim", 0.1 + 0.2}};
    std::stringstream ss;
    write_results_csv(ss, rows);
    const auto back = read_results_csv(ss);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].value, rows[0].value);
    EXPECT_EQ(back[1].value, rows[1].value);
    EXPECT_EQ(back[1].scene, "b");
    EXPECT_EQ(back[1].run_id, 1);
}

TEST(ResultsCsv, MalformedLine) {
    std::istringstream in("run_id,scene,metric,value\n0,a,psnr\n");
    expect_code(ErrorCode::FormatError, [&] { read_results_csv(in); });
}

TEST(ResultsTable, SingleRunIsPlainNumbers) {
    const auto t = build_results_table(grid(1, {"synthetic"}));
    EXPECT_EQ(t.columns, (std::vector<std::string>{"synthetic", "Average"}));
    EXPECT_EQ(t.metrics, (std::vector<std::string>{"psnr", "num_gs_thousands"}));
    EXPECT_EQ(t.cells[0][0].rendered, "25.00");
    EXPECT_EQ(t.cells[1][1].rendered, "1000");
    const auto text = render_results_table(t);
    EXPECT_NE(text.find("PSNR"), std::string::npos);
    EXPECT_NE(text.find("NumGS"), std::string::npos);
    EXPECT_EQ(text.find('['), std::string::npos);
    expect_code(ErrorCode::TooFewSamples, [] { build_results_table(grid(1, {"s"}), 0.9, false); });
}

TEST(ResultsTable, IncompleteGrid) {
    auto rows = grid(3, {"a", "b"});
    rows.pop_back();
    expect_code(ErrorCode::IncompleteGrid, [&] { build_results_table(rows); });
    expect_code(ErrorCode::IncompleteGrid, [] { build_results_table({}); });
    auto dup = grid(2, {"a"});
    dup.push_back(dup.front());
    expect_code(ErrorCode::IncompleteGrid, [&] { build_results_table(dup); });
}

TEST(ResultsTable, AverageColumnIsCiOfPerRunMeans) {
    const auto t = build_results_table(grid(5, {"a", "b"}));
    // Per-run means across scenes: 25.5, 25.6, ..., 25.9; s = 0.158114, t(0.95, 4) = 2.131847.
    const double half = 2.131847 * std::sqrt(0.025) / std::sqrt(5.0);
    const auto& avg = t.cells[0].back();
    EXPECT_NEAR(std::stod(avg.lower), 25.7 - half, 0.005 + 1e-9);
    EXPECT_NEAR(std::stod(avg.upper), 25.7 + half, 0.005 + 1e-9);
    EXPECT_EQ(avg.rendered, "25.[55-85]");
    EXPECT_EQ(t.cells[1].front().rendered, "10[05-35]");
}

TEST(ResultsTable, BoundsJson) {
    const auto t = build_results_table(grid(2, {"a"}));
    const auto j = nlohmann::json::parse(results_bounds_json(t));
    EXPECT_EQ(j["columns"][0], "a");
    EXPECT_EQ(j["rows"]["psnr"]["a"]["lower"], t.cells[0][0].lower);
    EXPECT_EQ(j["rows"]["psnr"]["Average"]["rendered"], t.cells[0][1].rendered);
}

TEST(MetricLabels, KnownAndUnknown) {
    EXPECT_EQ(metric_row_label("peak_vram_gib"), "Peak VRAM");
    EXPECT_EQ(metric_kind("ssim"), MetricKind::Ssim);
    expect_code(ErrorCode::FormatError, [] { metric_kind("lpips"); });
}
