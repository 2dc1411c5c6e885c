// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tilesplat/arena.hpp"
#include "tilesplat/config.hpp"
#include "tilesplat/error.hpp"
#include "tilesplat/report.hpp"
#include "tilesplat/stage_clock.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace tilesplat {

struct TrainResult {
    std::string scene;
    GaussianCloud cloud;
    StageBreakdown breakdown;
    std::array<std::size_t, kStageCount> stage_entries{};
    std::vector<ArenaEvent> trace;
    std::uint64_t final_total_bytes = 0;
    std::uint64_t max_total_bytes = 0;
    std::uint64_t peak_bytes = 0;
    std::size_t resize_copies = 0;
    std::size_t initial_count = 0;
    /// Gaussian count after every iteration.
    std::vector<std::size_t> count_history;
    std::vector<double> losses;
    double initial_psnr = 0.0, initial_ssim = 0.0;
    double final_psnr = 0.0, final_ssim = 0.0;
};

/// Called after every iteration with the 1-based iteration number and the current cloud.
using IterationObserver = std::function<void(int, const GaussianCloud&)>;

/// The scene a run trains on: the configured directory, or the synthetic generator. `seed`
/// drives the random initialization (directory) or the initial perturbation (synthetic).
SceneBundle make_scene(const RunConfig& config, std::uint64_t seed);

/// Mean PSNR and SSIM of `cloud` over every view of `scene`.
std::pair<double, double> evaluate(const GaussianCloud& cloud, const SceneBundle& scene, int tile_size, int threads);

/// Full training loop: per iteration, stages run in breakdown-table order under `clock`, with
/// every per-Gaussian, intersection and image buffer tracked in an arena on the same timeline.
/// Throws NumericalFailure when the loss becomes non-finite.
TrainResult train(const SceneBundle& scene, const RunConfig& config, std::uint64_t seed, const Clock& clock,
                  const IterationObserver& observer = {});

/// Result rows for one run (time_seconds only when `with_time`).
std::vector<ResultRow> result_rows(const TrainResult& result, int run_id, bool with_time);

/// One run; writes checkpoint.splt, breakdown.csv, arena.csv, metrics.csv, tables.txt and
/// config.ini under config.out.
TrainResult cmd_train(const RunConfig& config);

struct BenchSummary {
    std::vector<TrainResult> runs;
    /// Empty when the tables could not be rendered (e.g. a single repeat).
    std::string tables;
    std::string warning;
};

/// `repeats` runs with seeds seed + r. Writes results.csv (every metric, including time),
/// metrics.csv (everything except wall time, so it is reproducible byte for byte),
/// breakdown.csv (one column per run), and per-run artifacts under run_<r>/. With two or more
/// repeats tables.txt and bounds.json are written as well.
BenchSummary cmd_bench(const RunConfig& config);

/// Renders the results table from a results CSV and, when given, the breakdown tables from a
/// breakdown CSV. Writes tables.txt and bounds.json into `out_dir` when it is non-empty.
std::string cmd_report(const std::filesystem::path& results_csv, const std::filesystem::path& breakdown_csv,
                       const std::filesystem::path& out_dir);

/// Process exit code for a failure: 2 configuration, 3 numerical, 4 IO or input data, 1 other.
int exit_code_for(ErrorCode code) noexcept;

} // namespace tilesplat
