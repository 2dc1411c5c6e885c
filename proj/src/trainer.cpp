// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/trainer.hpp"

#include "tilesplat/checkpoint.hpp"
#include "tilesplat/loss.hpp"
#include "tilesplat/metrics.hpp"
#include "tilesplat/render.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace tilesplat {
namespace fs = std::filesystem;

namespace {

constexpr double kGib = 1024.0 * 1024.0 * 1024.0;

// Device-side footprint of each tracked buffer.
constexpr std::uint64_t kParamBytes = GaussianCloud::kScalarsPerGaussian * sizeof(float);
constexpr std::uint64_t kProjectedBytes = 2 * 4 + 3 * 4 + 4 + 4 + 4 + 3 * 4 + 4 + 1;
constexpr std::uint64_t kKeyBytes = 8;
constexpr std::uint64_t kIdBytes = 4;
constexpr std::uint64_t kPixelRgbBytes = 3 * 4;
constexpr std::uint64_t kPixelAuxBytes = 4 + 4;

struct PerGaussianBuffer {
    const char* name;
    std::uint64_t bytes;
};

constexpr PerGaussianBuffer kGaussianBuffers[] = {
    {"params", kParamBytes},    {"grads", kParamBytes},      {"adam_m", kParamBytes},
    {"adam_v", kParamBytes},    {"projected", kProjectedBytes}, {"index_offsets", 8},
    {"densify_stats", 8},
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

template <typename Fn> void write_with(const fs::path& path, Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    write_text(path, ss.str());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::string train_tables(const TrainResult& r) {
    std::string out = render_results_table(build_results_table(result_rows(r, 0, true)));
    BreakdownTable bt{{r.scene}, {r.breakdown}};
    out += "\n" + render_breakdown_table(bt, false, 4);
    out += "\n" + render_breakdown_table(bt, true, 4);
    return out;
}

void write_run_artifacts(const fs::path& dir, const TrainResult& r, const RunConfig& config) {
    ensure_dir(dir);
    save_checkpoint(r.cloud, dir / "checkpoint.splt");
    BreakdownTable bt{{r.scene}, {r.breakdown}};
    write_with(dir / "breakdown.csv", [&](std::ostream& o) { write_breakdown_csv(o, bt); });
    write_with(dir / "arena.csv", [&](std::ostream& o) { write_trace_csv(o, r.trace); });
    write_with(dir / "metrics.csv", [&](std::ostream& o) { write_results_csv(o, result_rows(r, 0, false)); });
    write_text(dir / "config.ini", config_to_text(config));
}

} // namespace

SceneBundle make_scene(const RunConfig& config, std::uint64_t seed) {
    if (config.scene.empty()) {
        SyntheticOptions opts = config.synthetic;
        opts.perturbation_seed = seed;
        return generate_synthetic(opts);
    }
    LoadOptions load;
    load.downscale = config.downscale;
    load.seed = seed;
    load.random_points = config.random_points;
    return load_scene(config.scene, load);
}

std::pair<double, double> evaluate(const GaussianCloud& cloud, const SceneBundle& scene, int tile_size, int threads) {
    double p = 0.0, s = 0.0;
    for (std::size_t v = 0; v < scene.cameras.size(); ++v) {
        const auto frame = render_frame(cloud, scene.cameras[v], tile_size, threads);
        p += psnr(frame.render.image, scene.targets[v]);
        s += ssim(frame.render.image, scene.targets[v]);
    }
    const double n = double(scene.cameras.size());
    return {p / n, s / n};
}

TrainResult train(const SceneBundle& scene, const RunConfig& config, std::uint64_t seed, const Clock& clock,
                  const IterationObserver& observer) {
    config.validate();
    if (scene.cameras.empty() || scene.cameras.size() != scene.targets.size()) {
        throw Error(ErrorCode::DimensionMismatch, "scene needs one target image per camera");
    }
    Rng rng(seed);
    TrainResult result;
    result.scene = scene.name;

    GaussianCloud cloud = normalize_rotations(scene.initial);
    if (config.densify == DensifyMode::Mcmc) cloud = fit_to_budget(cloud, config.mcmc.budget, rng);
    result.initial_count = cloud.size();
    std::tie(result.initial_psnr, result.initial_ssim) = evaluate(cloud, scene, config.tile_size, config.threads);

    std::vector<TileGrid> grids;
    std::size_t max_pixels = 0, max_tiles = 0;
    for (const auto& cam : scene.cameras) {
        grids.push_back(TileGrid::for_camera(cam, config.tile_size));
        max_pixels = std::max(max_pixels, std::size_t(cam.width) * std::size_t(cam.height));
        max_tiles = std::max(max_tiles, std::size_t(grids.back().tile_count()));
    }

    // Arena layout. Preallocation reserves the largest Gaussian count the run may reach.
    std::size_t reserve_gaussians = 0;
    if (config.preallocate) {
        reserve_gaussians = config.densify == DensifyMode::Mcmc ? config.mcmc.budget
                            : config.membench.max_gaussians ? config.membench.max_gaussians
                                                            : 4 * cloud.size();
        reserve_gaussians = std::max(reserve_gaussians, cloud.size());
    }
    const std::uint64_t reserve_isect = std::uint64_t(reserve_gaussians) * max_tiles;
    ArenaPolicy policy = GrowthPolicy{config.membench.growth_factor};
    if (config.preallocate) {
        std::uint64_t budget = 0;
        for (const auto& b : kGaussianBuffers) budget += b.bytes * reserve_gaussians;
        budget += (kKeyBytes + kIdBytes) * reserve_isect;
        budget += (3 * kPixelRgbBytes + kPixelAuxBytes) * max_pixels;
        policy = PreallocatePolicy{budget};
    }
    Arena arena(policy, &clock, config.membench.copy_window_seconds);
    GaussianBufferSet gaussian_buffers(arena);
    for (const auto& b : kGaussianBuffers) gaussian_buffers.add(b.name, b.bytes, cloud.size(), reserve_gaussians);
    const auto keys_buf = arena.alloc("isect_keys", 0, kKeyBytes * reserve_isect);
    const auto ids_buf = arena.alloc("isect_ids", 0, kIdBytes * reserve_isect);
    arena.alloc("render_image", kPixelRgbBytes * max_pixels);
    arena.alloc("render_aux", kPixelAuxBytes * max_pixels);
    arena.alloc("target_image", kPixelRgbBytes * max_pixels);
    arena.alloc("pixel_grads", kPixelRgbBytes * max_pixels);

    AdamState state = AdamState::for_cloud(cloud.size(), config.lr);
    state.beta1 = config.beta1;
    state.beta2 = config.beta2;
    state.eps = config.eps;
    DensifyStats stats;
    stats.resize(cloud.size());

    StageClock stages(clock);
    const int iterations = config.iterations;
    const double lr_pos0 = config.lr.positions * scene.extent;
    result.count_history.reserve(std::size_t(iterations));
    result.losses.reserve(std::size_t(iterations));

    const Micros start = clock.now();
    for (int it = 1; it <= iterations; ++it) {
        const std::size_t view = std::size_t(it - 1) % scene.cameras.size();
        const Camera& cam = scene.cameras[view];
        const TileGrid& grid = grids[view];

        auto proj = stages.with_stage(StageId::ProjectionForward, [&] { return project_forward(cloud, cam, grid); });
        const auto offsets =
            stages.with_stage(StageId::IndexOffset, [&] { return compute_index_offsets(proj.tile_counts); });
        SortedIntersections sorted;
        stages.with_stage(StageId::GenerateKeys, [&] {
            sorted.isect = generate_keys(proj, offsets, grid);
            arena.resize(keys_buf, kKeyBytes * offsets.total);
            arena.resize(ids_buf, kIdBytes * offsets.total);
        });
        stages.with_stage(StageId::Sorting, [&] { sort_intersections(sorted.isect); });
        stages.with_stage(StageId::TileRanges,
                          [&] { sorted.ranges = compute_tile_ranges(sorted.isect.keys, grid); });
        const auto render = stages.with_stage(StageId::RasterizationForward,
                                              [&] { return rasterize_forward(proj, sorted, grid, config.threads); });
        const auto resident = stages.with_stage(StageId::CopyImageToDevice,
                                                [&] { return copy_image_to_device<float>(scene.targets[view], cam); });
        const auto loss = stages.with_stage(StageId::LossGradient, [&] {
            return loss_gradient(render.image, resident, static_cast<float>(config.lambda_dssim));
        });
        if (!std::isfinite(loss.loss)) {
            throw Error(ErrorCode::NumericalFailure, fmt::format("non-finite loss at iteration {}", it));
        }
        const auto screen = stages.with_stage(StageId::RasterizationBackward, [&] {
            return rasterize_backward(proj, sorted, grid, render.aux, loss.dl_dpixel, config.threads);
        });
        stages.with_stage(StageId::ProjBwdOptimizer, [&] {
            auto grads = project_backward(cloud, cam, proj, screen);
            if (config.densify == DensifyMode::Default) stats.accumulate(grads.screen_grad_norms, proj.tile_counts);
            const double progress = iterations > 1 ? double(it - 1) / double(iterations - 1) : 0.0;
            state.lr.positions = lr_pos0 * std::pow(config.position_lr_final_factor, progress);
            adam_step(cloud, grads.params, state);
            if (config.densify == DensifyMode::Mcmc) mcmc_add_noise(cloud, state.lr.positions, config.mcmc, rng);
        });
        stages.with_stage(StageId::Densification, [&] {
            if (config.densify == DensifyMode::Default) {
                densify_default(cloud, state, stats, it, iterations, config.densify_default, scene.extent, rng,
                                &gaussian_buffers);
            } else if (config.densify == DensifyMode::Mcmc) {
                densify_mcmc(cloud, state, it, iterations, config.mcmc, rng);
            }
        });
        result.count_history.push_back(cloud.size());
        result.losses.push_back(double(loss.loss));
        if (observer) observer(it, cloud);
    }
    result.breakdown = stages.finalize(clock.now() - start);
    for (auto s : kAllStages) result.stage_entries[std::size_t(s)] = stages.entries(s);

    std::tie(result.final_psnr, result.final_ssim) = evaluate(cloud, scene, config.tile_size, config.threads);
    result.cloud = std::move(cloud);
    result.trace = arena.trace();
    result.final_total_bytes = arena.total_bytes();
    result.max_total_bytes = arena.max_total_bytes();
    result.peak_bytes = arena.peak_bytes();
    result.resize_copies = arena.resize_copies();
    return result;
}

std::vector<ResultRow> result_rows(const TrainResult& r, int run_id, bool with_time) {
    std::vector<ResultRow> rows;
    auto add = [&](const char* metric, double value) { rows.push_back({run_id, r.scene, metric, value}); };
    add("psnr", r.final_psnr);
    add("ssim", r.final_ssim);
    if (with_time) add("time_seconds", to_seconds(r.breakdown.total));
    add("total_vram_gib", double(r.max_total_bytes) / kGib);
    add("peak_vram_gib", double(r.peak_bytes) / kGib);
    add("num_gs_thousands", double(r.cloud.size()) / 1000.0);
    return rows;
}

TrainResult cmd_train(const RunConfig& config) {
    config.validate();
    const SceneBundle scene = make_scene(config, config.seed);
    SteadyClock clock;
    TrainResult r = train(scene, config, config.seed, clock);
    write_run_artifacts(config.out, r, config);
    write_text(config.out / "tables.txt", train_tables(r));
    return r;
}

BenchSummary cmd_bench(const RunConfig& config) {
    config.validate();
    ensure_dir(config.out);
    BenchSummary summary;
    std::vector<ResultRow> with_time, without_time;
    BreakdownTable breakdown;
    for (int rep = 0; rep < config.repeats; ++rep) {
        const std::uint64_t seed = config.seed + std::uint64_t(rep);
        const SceneBundle scene = make_scene(config, seed);
        SteadyClock clock;
        TrainResult r = train(scene, config, seed, clock);
        write_run_artifacts(config.out / fmt::format("run_{}", rep), r, config);
        for (auto& row : result_rows(r, rep, true)) with_time.push_back(row);
        for (auto& row : result_rows(r, rep, false)) without_time.push_back(row);
        breakdown.columns.push_back(fmt::format("run_{}", rep));
        breakdown.values.push_back(r.breakdown);
        summary.runs.push_back(std::move(r));
    }
    write_with(config.out / "results.csv", [&](std::ostream& o) { write_results_csv(o, with_time); });
    write_with(config.out / "metrics.csv", [&](std::ostream& o) { write_results_csv(o, without_time); });
    write_with(config.out / "breakdown.csv", [&](std::ostream& o) { write_breakdown_csv(o, breakdown); });
    write_text(config.out / "config.ini", config_to_text(config));
    try {
        const auto table = build_results_table(with_time, 0.90, false);
        summary.tables = render_results_table(table) + "\n" + render_breakdown_table(breakdown, false, 4) + "\n" +
                         render_breakdown_table(breakdown, true, 4);
        write_text(config.out / "tables.txt", summary.tables);
        write_text(config.out / "bounds.json", results_bounds_json(table));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::TooFewSamples) throw;
        summary.warning = e.what();
    }
    return summary;
}

std::string cmd_report(const fs::path& results_csv, const fs::path& breakdown_csv, const fs::path& out_dir) {
    std::ifstream in(results_csv);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + results_csv.string());
    const auto table = build_results_table(read_results_csv(in));
    std::string text = render_results_table(table);
    if (!breakdown_csv.empty()) {
        std::ifstream bin(breakdown_csv);
        if (!bin) throw Error(ErrorCode::MissingFile, "cannot open " + breakdown_csv.string());
        const auto bt = read_breakdown_csv(bin);
        text += "\n" + render_breakdown_table(bt, false, 4) + "\n" + render_breakdown_table(bt, true, 4);
    }
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text(out_dir / "tables.txt", text);
        write_text(out_dir / "bounds.json", results_bounds_json(table));
    }
    return text;
}

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::BudgetExceeded:
    case ErrorCode::BudgetViolation:
    case ErrorCode::TooFewSamples: return 2;
    case ErrorCode::NumericalFailure:
    case ErrorCode::NonFiniteParameter:
    case ErrorCode::ZeroQuaternion:
    case ErrorCode::NegativeUnaccounted: return 3;
    case ErrorCode::IoError:
    case ErrorCode::MissingFile:
    case ErrorCode::BadJson:
    case ErrorCode::FormatError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::IncompleteGrid: return 4;
    default: return 1;
    }
}

} // namespace tilesplat
