// Copyright Contributors to the tilesplat project
// SPDX-License-Identifier: Apache-2.0

#include "tilesplat/trainer.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>
#include <optional>

namespace {

using namespace tilesplat;

struct RunFlags {
    std::string config_path;
    std::optional<std::string> scene;
    std::optional<std::string> densify;
    std::optional<std::size_t> budget;
    std::optional<int> iters;
    std::optional<int> repeats;
    std::optional<std::uint64_t> seed;
    std::optional<int> tile_size;
    std::optional<int> downscale;
    std::optional<int> threads;
    std::optional<double> lambda;
    std::optional<std::string> out;
    bool preallocate = false;

    void attach(CLI::App& cmd, bool with_repeats) {
        cmd.add_option("--config", config_path, "Key/value config file")->check(CLI::ExistingFile);
        cmd.add_option("--scene", scene, "Scene directory (cameras.json + images/); synthetic when omitted");
        cmd.add_option("--densify", densify, "none, default or mcmc");
        cmd.add_option("--budget", budget, "Gaussian budget for mcmc");
        cmd.add_option("--iters", iters, "Training iterations");
        if (with_repeats) cmd.add_option("--repeats", repeats, "Number of benchmark runs");
        cmd.add_option("--seed", seed, "Base random seed");
        cmd.add_option("--tile-size", tile_size, "Tile edge in pixels");
        cmd.add_option("--downscale", downscale, "Integer image downscale factor");
        cmd.add_option("--threads", threads, "Worker threads per stage (1 is bitwise deterministic)");
        cmd.add_option("--lambda", lambda, "D-SSIM weight of the loss");
        cmd.add_option("--out", out, "Output directory");
        cmd.add_flag("--preallocate", preallocate, "Reserve buffers for the largest Gaussian count");
    }

    RunConfig resolve() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (scene) c.scene = *scene;
        if (densify) c.densify = parse_densify_mode(*densify);
        if (budget) c.mcmc.budget = *budget;
        if (iters) c.iterations = *iters;
        if (repeats) c.repeats = *repeats;
        if (seed) c.seed = *seed;
        if (tile_size) c.tile_size = *tile_size;
        if (downscale) c.downscale = *downscale;
        if (threads) c.threads = *threads;
        if (lambda) c.lambda_dssim = *lambda;
        if (out) c.out = *out;
        if (preallocate) c.preallocate = true;
        c.validate();
        return c;
    }
};

void log_run(const TrainResult& r) {
    spdlog::info("{}: PSNR {:.2f} -> {:.2f} dB, SSIM {:.3f} -> {:.3f}, {} Gaussians, {:.3f} s", r.scene,
                 r.initial_psnr, r.final_psnr, r.initial_ssim, r.final_ssim, r.cloud.size(),
                 to_seconds(r.breakdown.total));
    spdlog::info("arena: max total {} B, peak {} B, {} resize copies", r.max_total_bytes, r.peak_bytes,
                 r.resize_copies);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tilesplat: tile-based Gaussian-splatting training with stage timing and VRAM accounting"};
    app.require_subcommand(1);

    RunFlags train_flags, bench_flags;
    auto* train_cmd = app.add_subcommand("train", "Train once and write checkpoint, breakdown, arena trace, metrics");
    train_flags.attach(*train_cmd, false);
    auto* bench_cmd = app.add_subcommand("bench", "Repeat training with seeds seed..seed+repeats-1");
    bench_flags.attach(*bench_cmd, true);

    std::string results_csv, breakdown_csv, report_out;
    auto* report_cmd = app.add_subcommand("report", "Render tables from a results CSV");
    report_cmd->add_option("results", results_csv, "results.csv from bench")->required();
    report_cmd->add_option("--breakdown", breakdown_csv, "breakdown.csv to render as timing tables");
    report_cmd->add_option("--out", report_out, "Directory for tables.txt and bounds.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*train_cmd) {
            const auto config = train_flags.resolve();
            log_run(cmd_train(config));
            spdlog::info("artifacts written to {}", config.out.string());
        } else if (*bench_cmd) {
            const auto config = bench_flags.resolve();
            const auto summary = cmd_bench(config);
            for (const auto& r : summary.runs) log_run(r);
            if (summary.tables.empty()) {
                spdlog::warn("{}", summary.warning);
            } else {
                std::cout << summary.tables;
            }
            spdlog::info("artifacts written to {}", config.out.string());
        } else if (*report_cmd) {
            std::cout << cmd_report(results_csv, breakdown_csv, report_out);
        }
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
